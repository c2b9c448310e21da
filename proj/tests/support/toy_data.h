#pragma once

// Small factored corpora and model configs for model and decoder tests.

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "isomt/alignment.h"
#include "isomt/examples.h"
#include "isomt/model.h"
#include "isomt/rng.h"
#include "isomt/synthetic.h"
#include "isomt/vocab.h"

namespace isomt::testing {

struct ToyData {
  std::vector<FactoredExample> examples;
  std::vector<SegmentSpec> specs;
  Vocabulary source_vocab;
  Vocabulary target_vocab;
  int max_duration = 0;
  int max_total = 0;
  int max_pauses = 0;
};

// Word-level sources; counters from clean segments.
inline ToyData MakeToyData(int sentences, std::uint64_t seed, double pause_probability = 0.4) {
  SyntheticConfig cfg;
  cfg.num_sentences = sentences;
  cfg.pause_probability = pause_probability;
  cfg.max_words = 3;
  cfg.max_final_lengthening = 6;
  const FrameClock clock;
  const auto corpus = GenerateSyntheticCorpus(cfg, clock, Rng(seed));
  ToyData d;
  std::vector<AlignedUtterance> marked;
  for (const auto& u : corpus.utterances) {
    marked.push_back(MarkPauses(u, 0.3, clock));
    for (const auto& row : TargetRows(marked.back())) d.target_vocab.Add(row.token);
    std::istringstream in(u.source_text);
    std::string w;
    while (in >> w) d.source_vocab.Add(w);
  }
  for (const auto& u : marked) {
    SegmentSpec spec = ComputeSegments(u);
    FactoredExample ex = BuildFactoredExample(u, spec, d.target_vocab);
    std::istringstream in(u.source_text);
    std::string w;
    while (in >> w) ex.source_ids.push_back(d.source_vocab.Id(w));
    ex.source_ids.push_back(kEosId);
    d.max_duration = std::max(d.max_duration, *std::max_element(ex.dur.begin(), ex.dur.end()));
    d.max_total = std::max(d.max_total, ex.total[0]);
    d.max_pauses = std::max(d.max_pauses, ex.pause[0]);
    d.examples.push_back(std::move(ex));
    d.specs.push_back(std::move(spec));
  }
  return d;
}

// All four factors, learned embeddings.
inline ModelConfig ToyModelConfig(const ToyData& d, int width = 16, int layers = 2) {
  ModelConfig c;
  c.encoder_layers = layers;
  c.decoder_layers = layers;
  c.model_dim = width;
  c.heads = 2;
  c.ffn_dim = 2 * width;
  c.dropout = 0.0;
  c.label_smoothing = 0.1;
  c.source_vocab = static_cast<int>(d.source_vocab.size());
  c.main_vocab = static_cast<int>(d.target_vocab.size());
  c.main_embedding_dim = width;
  c.max_positions = 256;
  const int sizes[] = {d.max_duration + 1, d.max_total + 1, d.max_pauses + 1, d.max_total + 1};
  const int dims[] = {8, 8, 4, 8};
  const char* names[] = {kDurFactor, kTotalFactor, kPauseFactor, kSegmentFactor};
  for (int k = 0; k < 4; ++k) {
    FactorSpec f;
    f.name = names[k];
    f.vocab_size = sizes[k];
    f.embedding_dim = dims[k];
    f.feedback = k == 0 ? Feedback::kModelPrediction : Feedback::kExternallyComputed;
    c.factors.push_back(f);
  }
  return c;
}

}  // namespace isomt::testing
