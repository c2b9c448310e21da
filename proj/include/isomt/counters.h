#pragma once

#include <deque>
#include <vector>

namespace isomt {

// Live timing state fed to the decoder. Values may go negative when a
// hypothesis overruns its budget; they are clamped only at embedding lookup.
struct CounterState {
  long total_remaining = 0;
  long pauses_remaining = 0;
  long segment_remaining = 0;
  std::deque<long> pending_segments;

  bool operator==(const CounterState&) const = default;
};

// total = sum, pauses = n - 1, segment = first, pending = the rest.
// Throws ValidationError on an empty list or a non-positive duration.
CounterState InitCounters(const std::vector<int>& segment_durations);

// Applies one emitted (token, duration):
//   total   -= duration
//   [pause]: pauses -= 1 and segment <- next pending duration
//   else:    segment -= duration
// Throws PauseOverflow for [pause] when no segment is pending.
CounterState StepCounters(const CounterState& state, int token_id, int duration);

// As StepCounters, but an overflowing [pause] leaves pauses at zero and
// reloads an empty segment. Used when structural masking is disabled.
CounterState StepCountersSaturating(const CounterState& state, int token_id, int duration);

}  // namespace isomt
