#include "isomt/examples.h"

#include <algorithm>
#include <cctype>

#include "isomt/errors.h"

namespace isomt {

std::vector<TargetRow> TargetRows(const AlignedUtterance& u) {
  std::vector<TargetRow> rows;
  std::size_t boundary = 0;
  for (std::size_t i = 0; i < u.units.size(); ++i) {
    const Unit& unit = u.units[i];
    switch (unit.kind) {
      case UnitKind::kPhone:
        rows.push_back({unit.symbol, unit.frames});
        break;
      case UnitKind::kPause:
        rows.push_back({std::string(kPauseToken), 0});
        break;
      case UnitKind::kSilence:
        throw ValidationError("unmarked silence in '" + u.source_text + "'");
    }
    if (boundary < u.word_boundaries.size() && u.word_boundaries[boundary] == i) {
      rows.push_back({std::string(kEowToken), 0});
      ++boundary;
    }
  }
  return rows;
}

FactoredExample BuildFactoredExample(const std::vector<TargetRow>& rows, const SegmentSpec& spec,
                                     const Vocabulary& target_vocab) {
  if (spec.segment_durations.empty()) throw ValidationError("no segments");
  FactoredExample ex;
  int total = spec.TotalFrames();
  int pauses = static_cast<int>(spec.segment_durations.size()) - 1;
  std::size_t next_segment = 1;
  int segment = spec.segment_durations[0];
  auto push = [&](int id, int dur) {
    ex.main.push_back(id);
    ex.dur.push_back(dur);
    ex.total.push_back(total);
    ex.pause.push_back(pauses);
    ex.segment.push_back(segment);
  };
  push(kNullId, 0);
  for (const TargetRow& row : rows) {
    const int id = target_vocab.Id(row.token);
    const bool is_pause = id == kPauseId;
    const int dur = (is_pause || id == kEowId) ? 0 : row.duration;
    total -= dur;
    if (is_pause) {
      if (next_segment >= spec.segment_durations.size()) {
        throw ConsistencyError("more [pause] tokens than segment boundaries");
      }
      --pauses;
      segment = spec.segment_durations[next_segment++];
    } else {
      segment -= dur;
    }
    if (!spec.noised && (total < 0 || segment < 0)) {
      throw ConsistencyError("counter underflow at row " + std::to_string(ex.size()) +
                             " on unnoised data");
    }
    push(id, dur);
  }
  if (next_segment != spec.segment_durations.size()) {
    throw ConsistencyError("fewer [pause] tokens than segment boundaries");
  }
  return ex;
}

FactoredExample BuildFactoredExample(const AlignedUtterance& u, const SegmentSpec& spec,
                                     const Vocabulary& target_vocab) {
  return BuildFactoredExample(TargetRows(u), spec, target_vocab);
}

std::vector<TargetRow> FactoredRows(const FactoredExample& ex, const Vocabulary& target_vocab) {
  std::vector<TargetRow> rows;
  for (std::size_t t = 1; t < ex.size(); ++t)
    rows.push_back({target_vocab.Token(ex.main[t]), ex.dur[t]});
  return rows;
}

bool IsDurationToken(const std::string& token) {
  return !token.empty() && std::all_of(token.begin(), token.end(),
                                       [](unsigned char c) { return std::isdigit(c); });
}

namespace {

bool IsStructural(const std::string& token) {
  return token == kEowToken || token == kPauseToken;
}

}  // namespace

std::vector<std::string> RenderInterleaved(const std::vector<TargetRow>& rows) {
  std::vector<std::string> tokens;
  for (const TargetRow& row : rows) {
    tokens.push_back(row.token);
    if (!IsStructural(row.token)) tokens.push_back(std::to_string(row.duration));
  }
  return tokens;
}

InterleavedExample BuildInterleavedExample(const std::vector<TargetRow>& rows,
                                           std::vector<int> source_ids,
                                           const Vocabulary& interleaved_vocab) {
  InterleavedExample ex;
  ex.source_ids = std::move(source_ids);
  for (const auto& token : RenderInterleaved(rows)) ex.target_ids.push_back(interleaved_vocab.Id(token));
  return ex;
}

InterleavedCheck ValidateInterleaved(const std::vector<std::string>& tokens) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const bool is_dur = IsDurationToken(tokens[i]);
    if (is_dur) {
      if (i == 0) return {false, i, "sequence starts with a duration"};
      if (IsDurationToken(tokens[i - 1])) return {false, i, "two durations in a row"};
      if (IsStructural(tokens[i - 1])) return {false, i, "duration after " + tokens[i - 1]};
    } else if (i > 0 && !IsDurationToken(tokens[i - 1]) && !IsStructural(tokens[i - 1])) {
      return {false, i, "phone " + tokens[i - 1] + " has no duration"};
    }
  }
  if (!tokens.empty() && !IsDurationToken(tokens.back()) && !IsStructural(tokens.back())) {
    return {false, tokens.size(), "phone " + tokens.back() + " has no duration"};
  }
  return {};
}

std::vector<TargetRow> ParseInterleaved(const std::vector<std::string>& tokens) {
  const InterleavedCheck check = ValidateInterleaved(tokens);
  if (!check.valid) {
    throw ValidationError("invalid interleaved sequence at index " +
                          std::to_string(check.index) + ": " + check.reason);
  }
  std::vector<TargetRow> rows;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (IsStructural(tokens[i])) {
      rows.push_back({tokens[i], 0});
    } else {
      rows.push_back({tokens[i], std::stoi(tokens[i + 1])});
      ++i;
    }
  }
  return rows;
}

std::vector<int> FormatSource(const std::vector<std::string>& subwords,
                              const std::vector<int>& segment_bins,
                              const Vocabulary& source_vocab) {
  std::vector<int> ids;
  ids.reserve(subwords.size() + segment_bins.size() + 1);
  for (const auto& s : subwords) ids.push_back(source_vocab.Id(s));
  if (!segment_bins.empty()) {
    ids.push_back(kSeparatorId);
    for (int b : segment_bins) ids.push_back(source_vocab.BinId(b));
  }
  return ids;
}

std::vector<int> SegmentBins(const SegmentSpec& spec, const BinBoundaries& bins) {
  std::vector<int> out;
  for (int d : spec.segment_durations) out.push_back(bins.Assign(d));
  return out;
}

}  // namespace isomt
