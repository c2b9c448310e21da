#include "isomt/model.h"

#include <cmath>

#include "isomt/errors.h"
#include "isomt/ops.h"
#include "json.hpp"

namespace isomt::inline ISOMT_STORAGE {

namespace {

const std::vector<int>& Stream(const FactoredExample& ex, const std::string& name) {
  if (name == kDurFactor) return ex.dur;
  if (name == kTotalFactor) return ex.total;
  if (name == kPauseFactor) return ex.pause;
  if (name == kSegmentFactor) return ex.segment;
  throw ConfigError("unknown factor '" + name + "'");
}

Tensor RowsOf(const std::vector<Real>& table, std::size_t dim, std::span<const int> ids) {
  std::vector<Real> out;
  out.reserve(ids.size() * dim);
  for (int id : ids) {
    const auto begin = table.begin() + static_cast<std::ptrdiff_t>(id * dim);
    out.insert(out.end(), begin, begin + static_cast<std::ptrdiff_t>(dim));
  }
  return Tensor::FromData({ids.size(), dim}, std::move(out));
}

}  // namespace

std::vector<Real> SinusoidalTable(std::size_t rows, std::size_t dim) {
  std::vector<Real> table(rows * dim);
  for (std::size_t v = 0; v < rows; ++v) {
    for (std::size_t c = 0; c < dim; ++c) {
      const double i2 = static_cast<double>(c - c % 2);
      const double angle = static_cast<double>(v) / std::pow(10000.0, i2 / static_cast<double>(dim));
      table[v * dim + c] = static_cast<Real>(c % 2 == 0 ? std::sin(angle) : std::cos(angle));
    }
  }
  return table;
}

TrainingPair MakeTrainingPair(const FactoredExample& ex, const ModelConfig& config) {
  if (ex.size() == 0 || ex.main[0] != kNullId) {
    throw ValidationError("factored example must start with the NULL row");
  }
  TrainingPair pair;
  pair.source = ex.source_ids;
  const std::size_t n = ex.size();
  pair.factor_targets.resize(config.factors.size());
  for (std::size_t t = 0; t < n; ++t) {
    DecoderStepInput in;
    in.main = ex.main[t];
    for (const FactorSpec& f : config.factors) in.factors.push_back(f.Clamp(Stream(ex, f.name)[t]));
    pair.inputs.push_back(std::move(in));
    pair.main_targets.push_back(t + 1 < n ? ex.main[t + 1] : kEosId);
    for (std::size_t k = 0; k < config.factors.size(); ++k) {
      const FactorSpec& f = config.factors[k];
      const auto& s = Stream(ex, f.name);
      long value;
      if (t + 1 < n) {
        value = s[t + 1];
      } else {
        value = f.name == kDurFactor ? 0 : s[n - 1];
      }
      pair.factor_targets[k].push_back(f.Clamp(value));
    }
  }
  return pair;
}

Model::Model(ModelConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.Validate();
  const Rng rng(seed);
  const auto d = static_cast<std::size_t>(config_.model_dim);
  const auto ffn = static_cast<std::size_t>(config_.ffn_dim);
  params_.AddXavier("src_embed", {static_cast<std::size_t>(config_.source_vocab), d}, rng);
  for (int l = 0; l < config_.encoder_layers; ++l) {
    const std::string p = "enc." + std::to_string(l) + ".";
    AddNorm(p + "attn_norm", d);
    for (const char* w : {"q", "k", "v", "o"}) AddLinear(p + "attn." + w, d, d, rng);
    AddNorm(p + "ffn_norm", d);
    AddLinear(p + "ffn.in", d, ffn, rng);
    AddLinear(p + "ffn.out", ffn, d, rng);
  }
  AddNorm("enc.final_norm", d);

  const auto vm = static_cast<std::size_t>(config_.main_vocab);
  params_.AddXavier("main_embed", {vm, static_cast<std::size_t>(config_.main_embedding_dim)}, rng);
  for (const FactorSpec& f : config_.factors) {
    if (f.embedding_kind == EmbeddingKind::kLearned) {
      params_.AddXavier("factor." + f.name + ".embed",
                        {static_cast<std::size_t>(f.vocab_size), static_cast<std::size_t>(f.embedding_dim)},
                        rng);
    }
  }
  AddLinear("dec.input_proj", static_cast<std::size_t>(config_.DecoderInputWidth()), d, rng);
  for (int l = 0; l < config_.decoder_layers; ++l) {
    const std::string p = "dec." + std::to_string(l) + ".";
    AddNorm(p + "self_norm", d);
    for (const char* w : {"q", "k", "v", "o"}) AddLinear(p + "self." + w, d, d, rng);
    AddNorm(p + "cross_norm", d);
    for (const char* w : {"q", "k", "v", "o"}) AddLinear(p + "cross." + w, d, d, rng);
    AddNorm(p + "ffn_norm", d);
    AddLinear(p + "ffn.in", d, ffn, rng);
    AddLinear(p + "ffn.out", ffn, d, rng);
  }
  AddNorm("dec.final_norm", d);

  AddLinear("out.main", d, vm, rng);
  bool any_head = false;
  for (const FactorSpec& f : config_.factors) {
    if (!f.predicted) continue;
    any_head = true;
    AddLinear("out." + f.name, d, static_cast<std::size_t>(f.vocab_size), rng);
  }
  if (any_head) {
    params_.AddXavier("out.factor_cond.embed", {vm, d}, rng);
    AddLinear("out.factor_hidden", d, d, rng);
  }
}

void Model::AddLinear(const std::string& prefix, std::size_t in, std::size_t out, const Rng& rng) {
  params_.AddXavier(prefix + ".w", {in, out}, rng);
  params_.AddConstant(prefix + ".b", {1, out}, 0.0f);
}

void Model::AddNorm(const std::string& prefix, std::size_t dim) {
  params_.AddConstant(prefix + ".gamma", {1, dim}, 1.0f);
  params_.AddConstant(prefix + ".beta", {1, dim}, 0.0f);
}

Tensor Model::Linear(const std::string& prefix, const Tensor& x) const {
  return ops::AddRow(ops::MatMul(x, P(prefix + ".w")), P(prefix + ".b"));
}

Tensor Model::Norm(const std::string& prefix, const Tensor& x) const {
  return ops::LayerNorm(x, P(prefix + ".gamma"), P(prefix + ".beta"));
}

Tensor Model::SelfAttention(const std::string& prefix, const Tensor& x, const Tensor& kv,
                            bool causal, bool training, Rng* rng) const {
  const Tensor q = Linear(prefix + ".q", x);
  const Tensor k = Linear(prefix + ".k", kv);
  const Tensor v = Linear(prefix + ".v", kv);
  const auto heads = static_cast<std::size_t>(config_.heads);
  const std::size_t width = static_cast<std::size_t>(config_.model_dim) / heads;
  Tensor mixed;
  if (heads == 1) {
    mixed = ops::Attention(q, k, v, causal);
  } else {
    std::vector<Tensor> parts;
    for (std::size_t h = 0; h < heads; ++h) {
      parts.push_back(ops::Attention(ops::SliceCols(q, h * width, width),
                                     ops::SliceCols(k, h * width, width),
                                     ops::SliceCols(v, h * width, width), causal));
    }
    mixed = ops::ConcatCols(parts);
  }
  Tensor out = Linear(prefix + ".o", mixed);
  return rng ? ops::Dropout(out, static_cast<Real>(config_.dropout), *rng, training) : out;
}

Tensor Model::FeedForward(const std::string& prefix, const Tensor& x, bool training, Rng* rng) const {
  Tensor out = Linear(prefix + ".out", ops::Relu(Linear(prefix + ".in", x)));
  return rng ? ops::Dropout(out, static_cast<Real>(config_.dropout), *rng, training) : out;
}

Tensor Model::Encode(std::span<const int> source, bool training, Rng* dropout_rng) const {
  if (source.empty()) throw ValidationError("empty source sequence");
  if (source.size() > static_cast<std::size_t>(config_.max_positions)) {
    throw CapacityError("source length " + std::to_string(source.size()) +
                        " exceeds max_positions " + std::to_string(config_.max_positions));
  }
  const auto d = static_cast<std::size_t>(config_.model_dim);
  Tensor x = ops::Scale(ops::Embedding(P("src_embed"), source), std::sqrt(static_cast<Real>(d)));
  x = ops::Add(x, Tensor::FromData({source.size(), d}, SinusoidalTable(source.size(), d)));
  if (dropout_rng) x = ops::Dropout(x, static_cast<Real>(config_.dropout), *dropout_rng, training);
  for (int l = 0; l < config_.encoder_layers; ++l) {
    const std::string p = "enc." + std::to_string(l) + ".";
    const Tensor h = Norm(p + "attn_norm", x);
    x = ops::Add(x, SelfAttention(p + "attn", h, h, false, training, dropout_rng));
    x = ops::Add(x, FeedForward(p + "ffn", Norm(p + "ffn_norm", x), training, dropout_rng));
  }
  return Norm("enc.final_norm", x);
}

Tensor Model::EmbedDecoderInputs(std::span<const DecoderStepInput> rows) const {
  if (rows.empty()) throw ValidationError("no decoder rows");
  std::vector<int> main_ids;
  std::vector<std::vector<int>> factor_ids(config_.factors.size());
  for (const DecoderStepInput& r : rows) {
    if (r.factors.size() != config_.factors.size()) {
      throw DimensionError("decoder row has " + std::to_string(r.factors.size()) +
                           " factor values, model expects " +
                           std::to_string(config_.factors.size()));
    }
    main_ids.push_back(r.main);
    for (std::size_t k = 0; k < r.factors.size(); ++k) factor_ids[k].push_back(r.factors[k]);
  }
  std::vector<Tensor> parts{ops::Embedding(P("main_embed"), main_ids)};
  for (std::size_t k = 0; k < config_.factors.size(); ++k) {
    const FactorSpec& f = config_.factors[k];
    if (f.embedding_kind == EmbeddingKind::kLearned) {
      parts.push_back(ops::Embedding(P("factor." + f.name + ".embed"), factor_ids[k]));
      continue;
    }
    for (int id : factor_ids[k]) {
      if (id < 0 || id >= f.vocab_size) {
        throw VocabularyError("factor '" + f.name + "' value " + std::to_string(id) +
                              " outside vocabulary of size " + std::to_string(f.vocab_size));
      }
    }
    const auto dim = static_cast<std::size_t>(f.embedding_dim);
    parts.push_back(RowsOf(SinusoidalTable(static_cast<std::size_t>(f.vocab_size), dim), dim,
                           factor_ids[k]));
  }
  return Linear("dec.input_proj", parts.size() == 1 ? parts[0] : ops::ConcatCols(parts));
}

Tensor Model::Decode(const Tensor& memory, std::span<const DecoderStepInput> rows, bool training,
                     Rng* dropout_rng) const {
  if (rows.size() > static_cast<std::size_t>(config_.max_positions)) {
    throw CapacityError("target length " + std::to_string(rows.size()) +
                        " exceeds max_positions " + std::to_string(config_.max_positions));
  }
  const auto d = static_cast<std::size_t>(config_.model_dim);
  Tensor x = ops::Add(EmbedDecoderInputs(rows),
                      Tensor::FromData({rows.size(), d}, SinusoidalTable(rows.size(), d)));
  if (dropout_rng) x = ops::Dropout(x, static_cast<Real>(config_.dropout), *dropout_rng, training);
  for (int l = 0; l < config_.decoder_layers; ++l) {
    const std::string p = "dec." + std::to_string(l) + ".";
    const Tensor h = Norm(p + "self_norm", x);
    x = ops::Add(x, SelfAttention(p + "self", h, h, true, training, dropout_rng));
    x = ops::Add(x, SelfAttention(p + "cross", Norm(p + "cross_norm", x), memory, false, training,
                                  dropout_rng));
    x = ops::Add(x, FeedForward(p + "ffn", Norm(p + "ffn_norm", x), training, dropout_rng));
  }
  return Norm("dec.final_norm", x);
}

Tensor Model::MainLogits(const Tensor& hidden) const { return Linear("out.main", hidden); }

std::vector<Tensor> Model::FactorLogits(const Tensor& hidden, std::span<const int> main_tokens) const {
  std::vector<Tensor> out(config_.factors.size());
  if (!params_.Contains("out.factor_hidden.w")) return out;
  if (main_tokens.size() != hidden.rows()) {
    throw DimensionError("factor heads need one main token per position, got " +
                         std::to_string(main_tokens.size()) + " for " +
                         std::to_string(hidden.rows()));
  }
  const Tensor cond = ops::Add(hidden, ops::Embedding(P("out.factor_cond.embed"), main_tokens));
  const Tensor shared = ops::Relu(Linear("out.factor_hidden", cond));
  for (std::size_t k = 0; k < config_.factors.size(); ++k) {
    if (config_.factors[k].predicted) out[k] = Linear("out." + config_.factors[k].name, shared);
  }
  return out;
}

HeadLogits Model::Forward(std::span<const int> source, std::span<const DecoderStepInput> rows,
                          std::span<const int> main_tokens, bool training, Rng* dropout_rng) const {
  const Tensor memory = Encode(source, training, dropout_rng);
  const Tensor hidden = Decode(memory, rows, training, dropout_rng);
  return {MainLogits(hidden), FactorLogits(hidden, main_tokens)};
}

void Model::Save(const std::string& path) const {
  const nlohmann::json manifest{{"kind", "isomt-model"},
                                {"config", nlohmann::json::parse(config_.ToJson())}};
  SaveCheckpoint(path, params_, manifest.dump());
}

Model Model::Load(const std::string& path) {
  const Checkpoint ckpt = LoadCheckpoint(path);
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(ckpt.manifest);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": unreadable model manifest: " + e.what());
  }
  if (manifest.value("kind", "") != "isomt-model") {
    throw ConfigError(path + " is not a model checkpoint");
  }
  Model model(ModelConfig::FromJson(manifest.at("config").dump()), 0);
  RestoreParameters(model.params_, ckpt);
  return model;
}

Tensor MultiHeadLoss(const HeadLogits& logits, const TrainingPair& pair, const ModelConfig& config) {
  const auto smoothing = static_cast<Real>(config.label_smoothing);
  std::vector<Tensor> terms{ops::SoftmaxCrossEntropy(logits.main, pair.main_targets, smoothing)};
  std::vector<Real> weights{static_cast<Real>(config.main_loss_weight)};
  for (std::size_t k = 0; k < config.factors.size(); ++k) {
    const FactorSpec& f = config.factors[k];
    if (!f.predicted) continue;
    if (f.loss_weight < 0.0) throw ConfigError("loss weight of '" + f.name + "' is negative");
    terms.push_back(ops::SoftmaxCrossEntropy(logits.factors[k], pair.factor_targets[k], smoothing));
    weights.push_back(static_cast<Real>(f.loss_weight));
  }
  return ops::WeightedSum(terms, weights);
}

}  // namespace isomt::inline ISOMT_STORAGE
