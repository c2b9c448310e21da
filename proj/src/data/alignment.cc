#include "isomt/alignment.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "isomt/errors.h"
#include "isomt/vocab.h"

namespace isomt {

void AlignedUtterance::Validate() const {
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (units[i].frames < 0) {
      throw ValidationError("unit " + std::to_string(i) + " (" + units[i].symbol +
                            ") has negative duration");
    }
  }
  for (std::size_t i = 0; i < word_boundaries.size(); ++i) {
    if (word_boundaries[i] >= units.size()) {
      throw ValidationError("word boundary " + std::to_string(word_boundaries[i]) +
                            " outside utterance of " + std::to_string(units.size()) +
                            " units");
    }
    if (i > 0 && word_boundaries[i] <= word_boundaries[i - 1]) {
      throw ValidationError("word boundaries not strictly increasing");
    }
  }
}

int AlignedUtterance::PhoneFrames() const {
  int total = 0;
  for (const Unit& u : units)
    if (u.kind == UnitKind::kPhone) total += u.frames;
  return total;
}

int AlignedUtterance::PauseCount() const {
  return static_cast<int>(std::count_if(units.begin(), units.end(), [](const Unit& u) {
    return u.kind == UnitKind::kPause;
  }));
}

int FrameClock::ToFrames(double seconds) const {
  return static_cast<int>(std::lround(seconds * 1000.0 / frame_ms));
}

namespace {

AlignedUtterance ParseRecord(const std::string& line, long line_no, const FrameClock& clock) {
  const auto tab = line.find('\t');
  if (tab == std::string::npos) throw ParseError("missing TAB between source and phones", line_no);
  AlignedUtterance u;
  u.source_text = line.substr(0, tab);
  std::istringstream items(line.substr(tab + 1));
  std::string item;
  while (items >> item) {
    if (item == "|") {
      // Closes the word ending at the most recent phone.
      for (std::size_t i = u.units.size(); i-- > 0;) {
        if (u.units[i].kind != UnitKind::kPhone) continue;
        if (u.word_boundaries.empty() || u.word_boundaries.back() < i)
          u.word_boundaries.push_back(i);
        break;
      }
      continue;
    }
    const auto colon = item.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == item.size()) {
      throw ParseError("malformed item '" + item + "', expected phone:seconds", line_no);
    }
    double seconds = 0.0;
    try {
      std::size_t used = 0;
      seconds = std::stod(item.substr(colon + 1), &used);
      if (used != item.size() - colon - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError("malformed duration in '" + item + "'", line_no);
    }
    if (seconds < 0.0) {
      throw ValidationError("line " + std::to_string(line_no) + ": negative duration in '" +
                            item + "'");
    }
    const std::string symbol = item.substr(0, colon);
    const UnitKind kind = symbol == "sil" ? UnitKind::kSilence : UnitKind::kPhone;
    u.units.push_back({symbol, clock.ToFrames(seconds), kind});
  }
  return u;
}

}  // namespace

std::vector<AlignedUtterance> IngestAlignment(std::istream& in, const FrameClock& clock) {
  std::vector<AlignedUtterance> corpus;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    corpus.push_back(ParseRecord(line, line_no, clock));
  }
  return corpus;
}

std::vector<AlignedUtterance> IngestAlignmentFile(const std::string& path,
                                                  const FrameClock& clock) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open alignment file " + path);
  try {
    return IngestAlignment(in, clock);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.line());
  }
}

void WriteAlignment(std::ostream& out, const std::vector<AlignedUtterance>& corpus,
                    const FrameClock& clock) {
  for (const AlignedUtterance& u : corpus) {
    out << u.source_text << '\t';
    std::size_t next_boundary = 0;
    for (std::size_t i = 0; i < u.units.size(); ++i) {
      const Unit& unit = u.units[i];
      if (i > 0) out << ' ';
      const std::string symbol = unit.kind == UnitKind::kPhone ? unit.symbol : "sil";
      std::ostringstream seconds;
      seconds << std::setprecision(10) << clock.ToSeconds(unit.frames);
      out << symbol << ':' << seconds.str();
      if (next_boundary < u.word_boundaries.size() && u.word_boundaries[next_boundary] == i) {
        out << " |";
        ++next_boundary;
      }
    }
    out << '\n';
  }
}

AlignedUtterance MarkPauses(const AlignedUtterance& u, double threshold_seconds,
                            const FrameClock& clock) {
  if (threshold_seconds <= 0.0) throw ConfigError("pause threshold must be positive");
  // Merge runs of silence, remembering where each original unit went.
  struct Pending {
    Unit unit;
    bool word_end;
  };
  std::vector<Pending> merged;
  std::size_t boundary = 0;
  for (std::size_t i = 0; i < u.units.size(); ++i) {
    const bool word_end = boundary < u.word_boundaries.size() && u.word_boundaries[boundary] == i;
    if (word_end) ++boundary;
    const Unit& unit = u.units[i];
    const bool silence = unit.kind != UnitKind::kPhone;
    if (silence && !merged.empty() && merged.back().unit.kind != UnitKind::kPhone) {
      merged.back().unit.frames += unit.frames;
      continue;
    }
    merged.push_back({silence ? Unit{"sil", unit.frames, UnitKind::kSilence} : unit, word_end});
  }
  while (!merged.empty() && merged.front().unit.kind != UnitKind::kPhone) merged.erase(merged.begin());
  while (!merged.empty() && merged.back().unit.kind != UnitKind::kPhone) merged.pop_back();

  AlignedUtterance out;
  out.source_text = u.source_text;
  for (const Pending& p : merged) {
    if (p.unit.kind == UnitKind::kPhone) {
      out.units.push_back(p.unit);
      if (p.word_end) out.word_boundaries.push_back(out.units.size() - 1);
    } else if (clock.ToSeconds(p.unit.frames) > threshold_seconds + 1e-9) {
      out.units.push_back({std::string(kPauseToken), p.unit.frames, UnitKind::kPause});
    }
  }
  return out;
}

int SegmentSpec::TotalFrames() const {
  return std::accumulate(segment_durations.begin(), segment_durations.end(), 0);
}

SegmentSpec ComputeSegments(const AlignedUtterance& u) {
  SegmentSpec spec;
  int current = 0;
  bool has_phone = false;
  auto close = [&](std::size_t where) {
    if (!has_phone || current <= 0) {
      throw ValidationError("empty segment ending at unit " + std::to_string(where) +
                            " in '" + u.source_text + "'");
    }
    spec.segment_durations.push_back(current);
    current = 0;
    has_phone = false;
  };
  for (std::size_t i = 0; i < u.units.size(); ++i) {
    switch (u.units[i].kind) {
      case UnitKind::kPhone:
        current += u.units[i].frames;
        has_phone = true;
        break;
      case UnitKind::kPause:
        close(i);
        spec.pause_positions.push_back(i);
        break;
      case UnitKind::kSilence:
        throw ValidationError("unmarked silence at unit " + std::to_string(i) +
                              "; run MarkPauses first");
    }
  }
  close(u.units.size());
  return spec;
}

SegmentSpec AddNoise(const SegmentSpec& spec, double sigma_seconds, const FrameClock& clock,
                     Rng& rng) {
  if (sigma_seconds < 0.0) throw ConfigError("noise sigma must be non-negative");
  if (sigma_seconds == 0.0) return spec;
  SegmentSpec out = spec;
  out.noised = true;
  const double sigma_frames = sigma_seconds * clock.FramesPerSecond();
  for (int& d : out.segment_durations) {
    const long noised = std::lround(d + rng.Normal() * sigma_frames);
    d = static_cast<int>(std::max(1L, noised));
  }
  return out;
}

}  // namespace isomt
