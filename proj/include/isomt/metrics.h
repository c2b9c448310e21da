#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace isomt {

struct OverlapResult {
  // Mean of 1 - |ref - hyp| / ref over all paired segments; may be negative.
  double overlap = 0.0;
  // Same mean with each term clamped to [0, 1]; for display only.
  double clamped = 0.0;
  // Mean over sentences of each sentence's segment mean.
  double per_sentence = 0.0;
  std::size_t paired = 0;
  std::size_t unpaired = 0;
};

// Segments pair by index within a sentence up to the shorter list; unpaired
// segments are counted but excluded. Throws ValidationError on a reference
// duration <= 0, a negative hypothesis duration, mismatched sentence counts or
// when nothing pairs.
OverlapResult SpeechOverlap(const std::vector<std::vector<int>>& reference,
                            const std::vector<std::vector<int>>& hypothesis);

// Sentences whose pause counts differ.
int WrongPauseCount(const std::vector<int>& reference, const std::vector<int>& hypothesis);

struct BleuStats {
  std::array<long, 4> correct{};
  std::array<long, 4> total{};
  long hyp_len = 0;
  long ref_len = 0;
};

// Lowercased whitespace tokens, n-gram counts clipped by the reference.
BleuStats SentenceBleuStats(const std::string& hypothesis, const std::string& reference);

// BLEU|c:lc|tok:none|s:exp on 0..100: four n-gram orders, zero-match orders
// smoothed to 100 / (2^k * total) for the k-th such order, brevity penalty
// exp(1 - r/c) when c < r.
double BleuFromStats(const BleuStats& stats);

// Throws ValidationError on empty or mismatched corpora.
double CorpusBleu(const std::vector<std::string>& hypotheses,
                  const std::vector<std::string>& references);

}  // namespace isomt
