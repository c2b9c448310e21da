#include "isomt/search.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "isomt/errors.h"
#include "isomt/ops.h"
#include "isomt/vocab.h"

namespace isomt {

double Hypothesis::Score(double length_alpha) const {
  const double len = std::max<std::size_t>(1, tokens.size() + (finished ? 1 : 0));
  return log_prob / std::pow(len, length_alpha);
}

std::vector<int> Hypothesis::SegmentDurations() const {
  std::vector<int> segments{0};
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == kPauseId) {
      segments.push_back(0);
    } else {
      segments.back() += durations[i];
    }
  }
  return segments;
}

int Hypothesis::PauseCount() const {
  return static_cast<int>(std::count(tokens.begin(), tokens.end(), kPauseId));
}

int MaxOutputLength(const std::vector<int>& segment_durations, const DecodeOptions& options) {
  const double frames = std::accumulate(segment_durations.begin(), segment_durations.end(), 0.0);
  const double budget =
      options.max_length_factor * frames / std::max(1e-9, options.mean_phone_frames);
  return std::max(options.min_max_length, static_cast<int>(std::ceil(budget)));
}

}  // namespace isomt

namespace isomt::inline ISOMT_STORAGE {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Searcher {
  const Model& model;
  const ModelConfig& config;
  const DecodeOptions& options;
  Tensor memory;
  int dur_index;
  std::vector<Feedback> feedback;

  Searcher(const Model& m, std::span<const int> source, const DecodeOptions& o)
      : model(m), config(m.config()), options(o), dur_index(m.config().IndexOf(kDurFactor)) {
    if (o.beam < 1) throw ConfigError("beam width must be >= 1");
    memory = model.Encode(source, false, nullptr);
    for (const FactorSpec& f : config.factors) {
      Feedback mode = f.feedback;
      if (f.name != kDurFactor && options.feedback) mode = *options.feedback;
      if (mode == Feedback::kModelPrediction && !f.predicted) {
        throw ConfigError("factor '" + f.name + "' has no head to feed back predictions from");
      }
      feedback.push_back(f.name == kDurFactor ? Feedback::kModelPrediction : mode);
    }
  }

  std::vector<int> ExternalValues(const CounterState& s, int duration) const {
    std::vector<int> values;
    for (const FactorSpec& f : config.factors) {
      long v = 0;
      if (f.name == kDurFactor) v = duration;
      else if (f.name == kTotalFactor) v = s.total_remaining;
      else if (f.name == kPauseFactor) v = s.pauses_remaining;
      else v = s.segment_remaining;
      values.push_back(f.Clamp(v));
    }
    return values;
  }

  Hypothesis Start(const std::vector<int>& segments) const {
    Hypothesis h;
    h.state = InitCounters(segments);
    h.fed_factors.push_back(ExternalValues(h.state, 0));
    return h;
  }

  Tensor LastHidden(const Hypothesis& h) const {
    std::vector<DecoderStepInput> rows;
    rows.push_back({kNullId, h.fed_factors[0]});
    for (std::size_t i = 0; i < h.tokens.size(); ++i) rows.push_back({h.tokens[i], h.fed_factors[i + 1]});
    const Tensor hidden = model.Decode(memory, rows, false, nullptr);
    return ops::SliceRows(hidden, hidden.rows() - 1, 1);
  }

  // Masked main-token log-probabilities at the hypothesis' next position.
  std::vector<double> MainLogProbs(const Hypothesis& h, const Tensor& last) const {
    const Tensor logits = model.MainLogits(last);
    const auto lp = ops::LogSoftmaxRow(logits.data());
    std::vector<double> out(lp.begin(), lp.end());
    out[kNullId] = kNegInf;
    if (kSeparatorId < static_cast<int>(out.size())) out[kSeparatorId] = kNegInf;
    if (options.mask_structure && !config.factors.empty()) {
      if (h.state.pending_segments.empty() && kPauseId < static_cast<int>(out.size())) out[kPauseId] = kNegInf;
      if (!h.state.pending_segments.empty()) out[kEosId] = kNegInf;
    }
    return out;
  }

  // Appends token and its duration, updating counters and the next inputs.
  Hypothesis Extend(const Hypothesis& h, const Tensor& last, int token, double token_lp) const {
    Hypothesis next = h;
    next.log_prob += token_lp;
    if (token == kEosId) {
      next.finished = true;
      return next;
    }
    const bool structural = token == kEowId || token == kPauseId;
    std::vector<Tensor> heads;
    if (!config.factors.empty()) {
      const int tok[1] = {token};
      heads = model.FactorLogits(last, tok);
    }
    int duration = 0;
    if (dur_index >= 0 && !structural) {
      const auto lp = ops::LogSoftmaxRow(heads[static_cast<std::size_t>(dur_index)].data());
      // Phones last at least one frame.
      int best = lp.size() > 1 ? 1 : 0;
      for (int d = best + 1; d < static_cast<int>(lp.size()); ++d)
        if (lp[static_cast<std::size_t>(d)] > lp[static_cast<std::size_t>(best)]) best = d;
      duration = best;
      next.log_prob += lp[static_cast<std::size_t>(best)];
    }
    next.state = options.mask_structure ? StepCounters(h.state, token, duration)
                                        : StepCountersSaturating(h.state, token, duration);
    std::vector<int> values = ExternalValues(next.state, duration);
    for (std::size_t k = 0; k < config.factors.size(); ++k) {
      if (feedback[k] != Feedback::kModelPrediction || static_cast<int>(k) == dur_index) continue;
      const auto data = heads[k].data();
      values[k] = static_cast<int>(std::max_element(data.begin(), data.end()) - data.begin());
    }
    next.tokens.push_back(token);
    next.durations.push_back(duration);
    next.trace.push_back(next.state);
    next.fed_factors.push_back(std::move(values));
    return next;
  }
};

int Argmax(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

Hypothesis GreedyDecode(const Model& model, std::span<const int> source,
                        const std::vector<int>& segment_durations, const DecodeOptions& options) {
  NoGradGuard no_grad;
  const Searcher s(model, source, options);
  const int max_len = MaxOutputLength(segment_durations, options);
  Hypothesis h = s.Start(segment_durations);
  while (!h.finished && static_cast<int>(h.tokens.size()) < max_len) {
    const Tensor last = s.LastHidden(h);
    const auto lp = s.MainLogProbs(h, last);
    const int token = Argmax(lp);
    h = s.Extend(h, last, token, lp[static_cast<std::size_t>(token)]);
  }
  return h;
}

Hypothesis BeamDecode(const Model& model, std::span<const int> source,
                      const std::vector<int>& segment_durations, const DecodeOptions& options) {
  NoGradGuard no_grad;
  const Searcher s(model, source, options);
  const int max_len = MaxOutputLength(segment_durations, options);
  const auto width = static_cast<std::size_t>(options.beam);
  std::vector<Hypothesis> beams{s.Start(segment_durations)};
  std::vector<Hypothesis> finished;

  for (int step = 0; step < max_len && !beams.empty() && finished.size() < width; ++step) {
    struct Candidate {
      double log_prob;
      std::size_t beam;
      int token;
      double token_lp;
    };
    std::vector<Candidate> candidates;
    std::vector<Tensor> lasts;
    for (std::size_t b = 0; b < beams.size(); ++b) {
      lasts.push_back(s.LastHidden(beams[b]));
      const auto lp = s.MainLogProbs(beams[b], lasts.back());
      std::vector<int> ids(lp.size());
      std::iota(ids.begin(), ids.end(), 0);
      const auto keep = std::min(width, ids.size());
      std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(keep), ids.end(),
                        [&](int a, int c) { return lp[a] > lp[c] || (lp[a] == lp[c] && a < c); });
      for (std::size_t i = 0; i < keep; ++i) {
        const double v = lp[static_cast<std::size_t>(ids[i])];
        if (v == kNegInf) break;
        candidates.push_back({beams[b].log_prob + v, b, ids[i], v});
      }
    }
    // Extend first so duration log-probs take part in the ranking.
    std::vector<Hypothesis> extended;
    for (const Candidate& c : candidates) {
      extended.push_back(s.Extend(beams[c.beam], lasts[c.beam], c.token, c.token_lp));
    }
    std::vector<std::size_t> rank(extended.size());
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
      return extended[a].log_prob > extended[b].log_prob;
    });
    std::vector<Hypothesis> next;
    for (std::size_t r : rank) {
      if (next.size() + finished.size() >= width) break;
      if (extended[r].finished) {
        finished.push_back(std::move(extended[r]));
      } else {
        next.push_back(std::move(extended[r]));
      }
    }
    beams = std::move(next);
  }
  const std::vector<Hypothesis>& pool = finished.empty() ? beams : finished;
  if (pool.empty()) throw Error("beam search produced no hypothesis");
  const auto best = std::max_element(pool.begin(), pool.end(), [&](const Hypothesis& a, const Hypothesis& b) {
    return a.Score(options.length_alpha) < b.Score(options.length_alpha);
  });
  return *best;
}

}  // namespace isomt::inline ISOMT_STORAGE
