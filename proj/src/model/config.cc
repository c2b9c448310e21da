#include <algorithm>
#include <set>

#include "isomt/errors.h"
#include "isomt/model.h"
#include "json.hpp"

namespace isomt {

using nlohmann::json;

const char* FeedbackName(Feedback f) {
  return f == Feedback::kModelPrediction ? "model_prediction" : "externally_computed";
}

Feedback ParseFeedback(const std::string& name) {
  if (name == "model_prediction") return Feedback::kModelPrediction;
  if (name == "externally_computed") return Feedback::kExternallyComputed;
  throw ConfigError("unknown feedback mode '" + name +
                    "' (expected model_prediction or externally_computed)");
}

const char* EmbeddingKindName(EmbeddingKind k) {
  return k == EmbeddingKind::kLearned ? "learned" : "sinusoidal";
}

EmbeddingKind ParseEmbeddingKind(const std::string& name) {
  if (name == "learned") return EmbeddingKind::kLearned;
  if (name == "sinusoidal") return EmbeddingKind::kSinusoidal;
  throw ConfigError("unknown embedding kind '" + name + "' (expected learned or sinusoidal)");
}

int FactorSpec::Clamp(long value) const {
  return static_cast<int>(std::clamp<long>(value, 0, vocab_size - 1));
}

void ModelConfig::Validate() const {
  auto positive = [](int v, const char* what) {
    if (v < 1) throw ConfigError(std::string(what) + " must be positive");
  };
  positive(model_dim, "model_dim");
  positive(heads, "heads");
  positive(ffn_dim, "ffn_dim");
  positive(source_vocab, "source_vocab");
  positive(main_vocab, "main_vocab");
  positive(main_embedding_dim, "main_embedding_dim");
  positive(max_positions, "max_positions");
  if (encoder_layers < 0 || decoder_layers < 0) throw ConfigError("layer counts must be >= 0");
  if (model_dim % heads != 0) throw ConfigError("model_dim must be divisible by heads");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0, 1)");
  if (label_smoothing < 0.0 || label_smoothing >= 1.0)
    throw ConfigError("label_smoothing must be in [0, 1)");
  if (main_loss_weight < 0.0) throw ConfigError("main loss weight must be non-negative");
  static const std::vector<std::string> order{kDurFactor, kTotalFactor, kPauseFactor,
                                              kSegmentFactor};
  std::size_t last = 0;
  bool first = true;
  for (const FactorSpec& f : factors) {
    const auto it = std::find(order.begin(), order.end(), f.name);
    if (it == order.end()) throw ConfigError("unknown factor '" + f.name + "'");
    const auto pos = static_cast<std::size_t>(it - order.begin());
    if (!first && pos <= last) throw ConfigError("factors must be unique and in dur/total/pause/segment order");
    first = false;
    last = pos;
    positive(f.vocab_size, "factor vocab_size");
    positive(f.embedding_dim, "factor embedding_dim");
    if (f.loss_weight < 0.0) throw ConfigError("loss weight of '" + f.name + "' is negative");
    if (f.feedback == Feedback::kModelPrediction && !f.predicted) {
      throw ConfigError("factor '" + f.name + "' fed back from model predictions needs a head");
    }
  }
}

int ModelConfig::DecoderInputWidth() const {
  int width = main_embedding_dim;
  for (const FactorSpec& f : factors) width += f.embedding_dim;
  return width;
}

const FactorSpec* ModelConfig::Find(const std::string& name) const {
  for (const FactorSpec& f : factors)
    if (f.name == name) return &f;
  return nullptr;
}

int ModelConfig::IndexOf(const std::string& name) const {
  for (std::size_t i = 0; i < factors.size(); ++i)
    if (factors[i].name == name) return static_cast<int>(i);
  return -1;
}

std::string ModelConfig::ToJson() const {
  json j{{"encoder_layers", encoder_layers},
         {"decoder_layers", decoder_layers},
         {"model_dim", model_dim},
         {"heads", heads},
         {"ffn_dim", ffn_dim},
         {"dropout", dropout},
         {"label_smoothing", label_smoothing},
         {"source_vocab", source_vocab},
         {"main_vocab", main_vocab},
         {"main_embedding_dim", main_embedding_dim},
         {"main_loss_weight", main_loss_weight},
         {"max_positions", max_positions}};
  json fs = json::array();
  for (const FactorSpec& f : factors) {
    fs.push_back({{"name", f.name},
                  {"vocab_size", f.vocab_size},
                  {"embedding_dim", f.embedding_dim},
                  {"loss_weight", f.loss_weight},
                  {"predicted", f.predicted},
                  {"feedback", FeedbackName(f.feedback)},
                  {"embedding_kind", EmbeddingKindName(f.embedding_kind)}});
  }
  j["factors"] = fs;
  return j.dump();
}

ModelConfig ModelConfig::FromJson(const std::string& text) {
  try {
    const json j = json::parse(text);
    ModelConfig c;
    c.encoder_layers = j.at("encoder_layers");
    c.decoder_layers = j.at("decoder_layers");
    c.model_dim = j.at("model_dim");
    c.heads = j.at("heads");
    c.ffn_dim = j.at("ffn_dim");
    c.dropout = j.at("dropout");
    c.label_smoothing = j.at("label_smoothing");
    c.source_vocab = j.at("source_vocab");
    c.main_vocab = j.at("main_vocab");
    c.main_embedding_dim = j.at("main_embedding_dim");
    c.main_loss_weight = j.at("main_loss_weight");
    c.max_positions = j.at("max_positions");
    for (const json& f : j.at("factors")) {
      FactorSpec s;
      s.name = f.at("name");
      s.vocab_size = f.at("vocab_size");
      s.embedding_dim = f.at("embedding_dim");
      s.loss_weight = f.at("loss_weight");
      s.predicted = f.at("predicted");
      s.feedback = ParseFeedback(f.at("feedback"));
      s.embedding_kind = ParseEmbeddingKind(f.at("embedding_kind"));
      c.factors.push_back(std::move(s));
    }
    c.Validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed model config: ") + e.what());
  }
}

}  // namespace isomt
