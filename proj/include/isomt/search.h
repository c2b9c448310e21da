#pragma once

#include "isomt/real.h"

#include <optional>
#include <span>
#include <vector>

#include "isomt/counters.h"
#include "isomt/model.h"

namespace isomt {

struct DecodeOptions {
  int beam = 1;
  // Masks [pause] once no segment is pending and </s> while one is.
  bool mask_structure = true;
  // Output budget: max_length_factor * total frames / mean_phone_frames rows.
  double max_length_factor = 3.0;
  double mean_phone_frames = 8.0;
  int min_max_length = 8;
  // When set, overrides the feedback mode of every counter factor.
  std::optional<Feedback> feedback;
  // Score = log-probability / length^length_alpha.
  double length_alpha = 1.0;
};

struct Hypothesis {
  std::vector<int> tokens;
  std::vector<int> durations;
  // Counters recomputed from the emitted rows, whatever was fed back.
  CounterState state;
  // Decoder inputs consumed at each step, starting with the NULL row.
  std::vector<std::vector<int>> fed_factors;
  // External counter state after each emitted row.
  std::vector<CounterState> trace;
  double log_prob = 0.0;
  bool finished = false;

  double Score(double length_alpha) const;
  // Phone frames between [pause] tokens.
  std::vector<int> SegmentDurations() const;
  int PauseCount() const;
};

int MaxOutputLength(const std::vector<int>& segment_durations, const DecodeOptions& options);

}  // namespace isomt

namespace isomt::inline ISOMT_STORAGE {

// Argmax main token, then the argmax duration for it; counters for the next
// step follow each factor's feedback mode.
Hypothesis GreedyDecode(const Model& model, std::span<const int> source,
                        const std::vector<int>& segment_durations, const DecodeOptions& options);

// Beam over main tokens only; each expansion takes its greedy duration and
// carries its own counter state. Width 1 matches GreedyDecode.
Hypothesis BeamDecode(const Model& model, std::span<const int> source,
                      const std::vector<int>& segment_durations, const DecodeOptions& options);

}  // namespace isomt::inline ISOMT_STORAGE
