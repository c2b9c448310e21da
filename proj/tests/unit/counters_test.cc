#include "doctest.h"
#include "isomt/counters.h"
#include "isomt/errors.h"
#include "isomt/vocab.h"

namespace isomt {
namespace {

constexpr int kPhone = kFirstBinId + 7;

TEST_CASE("counters start from the segment list") {
  const auto s = InitCounters({77, 12});
  CHECK(s == CounterState{89, 1, 77, {12}});
  CHECK(InitCounters({50}) == CounterState{50, 0, 50, {}});
  const auto three = InitCounters({4, 9, 6});
  CHECK(three.total_remaining == 19);
  CHECK(three.pauses_remaining == 2);
  CHECK_THROWS_AS(InitCounters({}), ValidationError);
  CHECK_THROWS_AS(InitCounters({3, 0}), ValidationError);
}

TEST_CASE("a phone consumes total and segment") {
  CHECK(StepCounters({89, 1, 77, {12}}, kPhone, 2) == CounterState{87, 1, 75, {12}});
}

TEST_CASE("a pause reloads the next segment") {
  CHECK(StepCounters({12, 1, 0, {12}}, kPauseId, 0) == CounterState{12, 0, 12, {}});
}

TEST_CASE("end of word leaves the state alone") {
  const CounterState s{30, 2, 7, {10, 13}};
  CHECK(StepCounters(s, kEowId, 0) == s);
}

TEST_CASE("pause with nothing pending overflows") {
  const CounterState s{5, 0, 5, {}};
  CHECK_THROWS_AS(StepCounters(s, kPauseId, 0), PauseOverflow);
  CHECK(StepCountersSaturating(s, kPauseId, 0) == CounterState{5, 0, 0, {}});
}

TEST_CASE("counters may run negative") {
  CHECK(StepCounters({3, 0, 3, {}}, kPhone, 5) == CounterState{-2, 0, -2, {}});
}

}  // namespace
}  // namespace isomt
