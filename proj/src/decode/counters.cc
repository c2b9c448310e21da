#include "isomt/counters.h"

#include <string>

#include "isomt/errors.h"
#include "isomt/vocab.h"

namespace isomt {

CounterState InitCounters(const std::vector<int>& segment_durations) {
  if (segment_durations.empty()) throw ValidationError("no segment durations to initialise counters");
  CounterState s;
  for (std::size_t i = 0; i < segment_durations.size(); ++i) {
    if (segment_durations[i] <= 0) {
      throw ValidationError("segment " + std::to_string(i) + " has non-positive duration " +
                            std::to_string(segment_durations[i]));
    }
    s.total_remaining += segment_durations[i];
    if (i > 0) s.pending_segments.push_back(segment_durations[i]);
  }
  s.segment_remaining = segment_durations.front();
  s.pauses_remaining = static_cast<long>(s.pending_segments.size());
  return s;
}

CounterState StepCounters(const CounterState& state, int token_id, int duration) {
  if (duration < 0) throw ValidationError("negative duration " + std::to_string(duration));
  CounterState next = state;
  next.total_remaining -= duration;
  if (token_id == kPauseId) {
    if (next.pending_segments.empty()) throw PauseOverflow("[pause] emitted with no segment pending");
    next.pauses_remaining -= 1;
    next.segment_remaining = next.pending_segments.front();
    next.pending_segments.pop_front();
  } else {
    next.segment_remaining -= duration;
  }
  return next;
}

CounterState StepCountersSaturating(const CounterState& state, int token_id, int duration) {
  if (token_id == kPauseId && state.pending_segments.empty()) {
    CounterState next = state;
    next.total_remaining -= duration;
    next.segment_remaining = 0;
    return next;
  }
  return StepCounters(state, token_id, duration);
}

}  // namespace isomt
