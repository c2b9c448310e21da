#pragma once

#include "isomt/real.h"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "isomt/examples.h"
#include "isomt/optim.h"
#include "isomt/rng.h"
#include "isomt/tensor.h"

namespace isomt {

enum class Feedback { kModelPrediction, kExternallyComputed };
enum class EmbeddingKind { kLearned, kSinusoidal };

const char* FeedbackName(Feedback f);
Feedback ParseFeedback(const std::string& name);
const char* EmbeddingKindName(EmbeddingKind k);
EmbeddingKind ParseEmbeddingKind(const std::string& name);

// Canonical factor names, in stream order.
inline constexpr const char* kDurFactor = "dur";
inline constexpr const char* kTotalFactor = "total";
inline constexpr const char* kPauseFactor = "pause";
inline constexpr const char* kSegmentFactor = "segment";

struct FactorSpec {
  std::string name;
  // Values are ids 0..vocab_size-1; larger and negative values are clamped.
  int vocab_size = 1;
  int embedding_dim = 64;
  double loss_weight = 1.0;
  bool predicted = true;
  Feedback feedback = Feedback::kExternallyComputed;
  EmbeddingKind embedding_kind = EmbeddingKind::kLearned;

  int Clamp(long value) const;
  bool operator==(const FactorSpec&) const = default;
};

struct ModelConfig {
  int encoder_layers = 2;
  int decoder_layers = 2;
  int model_dim = 128;
  int heads = 4;
  int ffn_dim = 256;
  double dropout = 0.1;
  double label_smoothing = 0.1;
  int source_vocab = 0;
  int main_vocab = 0;
  int main_embedding_dim = 128;
  double main_loss_weight = 1.0;
  // Any subset of dur, total, pause, segment, in that order.
  std::vector<FactorSpec> factors;
  int max_positions = 512;

  // Throws ConfigError on inconsistent sizes or negative weights.
  void Validate() const;
  int DecoderInputWidth() const;
  const FactorSpec* Find(const std::string& name) const;
  int IndexOf(const std::string& name) const;
  bool operator==(const ModelConfig&) const = default;

  std::string ToJson() const;
  static ModelConfig FromJson(const std::string& text);
};

}  // namespace isomt

namespace isomt::inline ISOMT_STORAGE {

// Decoder input at one position: the previous main token and, per configured
// factor, the value belonging to that token (counters after its duration).
struct DecoderStepInput {
  int main = kNullId;
  std::vector<int> factors;
  bool operator==(const DecoderStepInput&) const = default;
};

// Teacher-forced view of one sentence. Position t consumes row t of the
// streams and is trained to emit row t + 1; the last position emits </s>
// with duration 0 and the final counters repeated.
struct TrainingPair {
  std::vector<int> source;
  std::vector<DecoderStepInput> inputs;
  std::vector<int> main_targets;
  // Indexed like ModelConfig::factors.
  std::vector<std::vector<int>> factor_targets;
};

TrainingPair MakeTrainingPair(const FactoredExample& ex, const ModelConfig& config);

struct HeadLogits {
  Tensor main;
  // Indexed like ModelConfig::factors; undefined where predicted is false.
  std::vector<Tensor> factors;
};

class Model {
 public:
  Model(ModelConfig config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }

  // Source memory [S, d].
  Tensor Encode(std::span<const int> source, bool training, Rng* dropout_rng) const;
  // Concatenated embeddings projected to model width, positions not yet added.
  Tensor EmbedDecoderInputs(std::span<const DecoderStepInput> rows) const;
  // Final decoder states [T, d] under a causal mask.
  Tensor Decode(const Tensor& memory, std::span<const DecoderStepInput> rows, bool training,
                Rng* dropout_rng) const;
  Tensor MainLogits(const Tensor& hidden) const;
  // Factor heads see the hidden state plus the main token chosen at the same
  // position, which is how durations are conditioned on the emitted phone.
  std::vector<Tensor> FactorLogits(const Tensor& hidden, std::span<const int> main_tokens) const;

  HeadLogits Forward(std::span<const int> source, std::span<const DecoderStepInput> rows,
                     std::span<const int> main_tokens, bool training = false,
                     Rng* dropout_rng = nullptr) const;

  // Manifest holds the config as JSON.
  void Save(const std::string& path) const;
  static Model Load(const std::string& path);

 private:
  Tensor Sublayer(const std::string& prefix, const Tensor& x) const;
  Tensor SelfAttention(const std::string& prefix, const Tensor& x, const Tensor& kv, bool causal,
                       bool training, Rng* rng) const;
  Tensor FeedForward(const std::string& prefix, const Tensor& x, bool training, Rng* rng) const;
  Tensor Norm(const std::string& prefix, const Tensor& x) const;
  Tensor Linear(const std::string& prefix, const Tensor& x) const;
  void AddLinear(const std::string& prefix, std::size_t in, std::size_t out, const Rng& rng);
  void AddNorm(const std::string& prefix, std::size_t dim);
  const Tensor& P(const std::string& name) const { return params_.Get(name); }

  ModelConfig config_;
  ParameterStore params_;
};

// Fixed sinusoidal codes of integer values: row v, column 2i is
// sin(v / 10000^(2i/dim)) and column 2i+1 the matching cosine.
std::vector<Real> SinusoidalTable(std::size_t rows, std::size_t dim);

// Σ_head weight_head · label-smoothed CE_head. Heads with weight 0 stay in the
// graph so their gradients are exact zeros.
Tensor MultiHeadLoss(const HeadLogits& logits, const TrainingPair& pair,
                     const ModelConfig& config);

}  // namespace isomt::inline ISOMT_STORAGE
