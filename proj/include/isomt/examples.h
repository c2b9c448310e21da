#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "isomt/alignment.h"
#include "isomt/bins.h"
#include "isomt/vocab.h"

namespace isomt {

// One emitted target position: a phone, <eow> or [pause] and its duration.
struct TargetRow {
  std::string token;
  int duration = 0;

  bool operator==(const TargetRow&) const = default;
};

// Phones in order with <eow> after each word-final phone and [pause] units
// kept; structural tokens carry duration 0.
std::vector<TargetRow> TargetRows(const AlignedUtterance& u);

// The five aligned target streams. Row 0 is the NULL column holding the
// initial counter values; row t > 0 holds token t, its duration and the
// counters after that token.
struct FactoredExample {
  std::vector<int> source_ids;
  std::vector<int> main;
  std::vector<int> dur;
  std::vector<int> total;
  std::vector<int> pause;
  std::vector<int> segment;

  std::size_t size() const { return main.size(); }
  bool operator==(const FactoredExample&) const = default;
};

// Builds the streams from target rows and (possibly noised) segment durations.
// Throws ConsistencyError if an unnoised spec drives a counter below zero or
// the pause count disagrees with the segment count.
FactoredExample BuildFactoredExample(const std::vector<TargetRow>& rows,
                                     const SegmentSpec& spec, const Vocabulary& target_vocab);
FactoredExample BuildFactoredExample(const AlignedUtterance& u, const SegmentSpec& spec,
                                     const Vocabulary& target_vocab);

// Rows 1.. of a factored example, rendered back to tokens.
std::vector<TargetRow> FactoredRows(const FactoredExample& ex, const Vocabulary& target_vocab);

struct InterleavedExample {
  std::vector<int> source_ids;
  std::vector<int> target_ids;
};

// "D 2 OW1 5 ... <eow> [pause] ..." token strings.
std::vector<std::string> RenderInterleaved(const std::vector<TargetRow>& rows);
InterleavedExample BuildInterleavedExample(const std::vector<TargetRow>& rows,
                                           std::vector<int> source_ids,
                                           const Vocabulary& interleaved_vocab);

bool IsDurationToken(const std::string& token);

struct InterleavedCheck {
  bool valid = true;
  // First offending position when !valid.
  std::size_t index = 0;
  std::string reason;
};

// Rejects a leading duration, adjacent durations, a duration after <eow> or
// [pause], and a phone not followed by exactly one duration.
InterleavedCheck ValidateInterleaved(const std::vector<std::string>& tokens);

// Inverse of RenderInterleaved; throws ValidationError on invalid input.
std::vector<TargetRow> ParseInterleaved(const std::vector<std::string>& tokens);

// Subwords, then <||> and one <binK> per segment when bins is non-empty.
std::vector<int> FormatSource(const std::vector<std::string>& subwords,
                              const std::vector<int>& segment_bins,
                              const Vocabulary& source_vocab);

std::vector<int> SegmentBins(const SegmentSpec& spec, const BinBoundaries& bins);

}  // namespace isomt
