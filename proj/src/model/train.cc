#include "isomt/train.h"

#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "isomt/errors.h"
#include "isomt/ops.h"

namespace isomt::inline ISOMT_STORAGE {

namespace {

std::size_t Tokens(const TrainingPair& p) { return p.main_targets.size(); }

std::vector<std::vector<std::size_t>> MakeBatches(const std::vector<std::size_t>& order,
                                                  const std::vector<TrainingPair>& data,
                                                  int batch_tokens) {
  std::vector<std::vector<std::size_t>> batches;
  std::size_t tokens = 0;
  for (std::size_t i : order) {
    if (batches.empty() || tokens >= static_cast<std::size_t>(batch_tokens)) {
      batches.emplace_back();
      tokens = 0;
    }
    batches.back().push_back(i);
    tokens += Tokens(data[i]);
  }
  return batches;
}

Checkpoint Snapshot(const ParameterStore& store) {
  Checkpoint c;
  for (const auto& [name, t] : store.params()) {
    c.params.emplace(name, Tensor::FromData(t.shape(), {t.data().begin(), t.data().end()}));
  }
  return c;
}

}  // namespace

double MeanLoss(const Model& model, const std::vector<TrainingPair>& data) {
  NoGradGuard no_grad;
  double sum = 0.0;
  std::size_t tokens = 0;
  for (const TrainingPair& p : data) {
    const HeadLogits logits = model.Forward(p.source, p.inputs, p.main_targets);
    sum += static_cast<double>(MultiHeadLoss(logits, p, model.config()).item()) *
           static_cast<double>(Tokens(p));
    tokens += Tokens(p);
  }
  return tokens == 0 ? 0.0 : sum / static_cast<double>(tokens);
}

TrainResult Train(Model& model, const std::vector<TrainingPair>& data, const TrainOptions& options,
                  const Validator& validator, const std::function<void(const std::string&)>& log) {
  if (data.empty()) throw TrainingError("no training data");
  if (options.epochs < 1 || options.batch_tokens < 1 || options.validate_every < 1) {
    throw ConfigError("epochs, batch_tokens and validate_every must be positive");
  }
  if (!options.checkpoint_dir.empty()) std::filesystem::create_directories(options.checkpoint_dir);

  const Rng root(options.seed);
  const Rng shuffle_root = root.Split("shuffle");
  const Rng dropout_root = root.Split("dropout");
  ParameterStore& store = model.params();
  TrainResult result;
  Checkpoint best;
  bool have_best = false;

  std::vector<std::size_t> order(data.size());
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle = shuffle_root.Split(static_cast<std::uint64_t>(epoch));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(shuffle.UniformInt(0, static_cast<long>(i) - 1))]);
    }
    double epoch_loss = 0.0;
    std::size_t epoch_tokens = 0;
    for (const auto& batch : MakeBatches(order, data, options.batch_tokens)) {
      std::size_t batch_tokens = 0;
      for (std::size_t i : batch) batch_tokens += Tokens(data[i]);
      for (std::size_t i : batch) {
        const TrainingPair& p = data[i];
        Rng dropout = dropout_root.Split(static_cast<std::uint64_t>(result.updates)).Split(i);
        const HeadLogits logits = model.Forward(p.source, p.inputs, p.main_targets, true, &dropout);
        const Tensor loss = MultiHeadLoss(logits, p, model.config());
        const double value = loss.item();
        if (!std::isfinite(value)) {
          std::ostringstream msg;
          msg << "non-finite loss " << value << " at epoch " << epoch << ", update "
              << result.updates << ", sentence " << i << " (" << Tokens(p)
              << " target tokens, lr "
              << InverseSqrtLearningRate(options.learning_rate, result.updates + 1, options.warmup_steps)
              << ")";
          throw TrainingError(msg.str());
        }
        const double share = static_cast<double>(Tokens(p)) / static_cast<double>(batch_tokens);
        ops::Scale(loss, static_cast<Real>(share)).Backward();
        epoch_loss += value * static_cast<double>(Tokens(p));
        epoch_tokens += Tokens(p);
      }
      if (options.clip_norm > 0.0) store.ClipGradNorm(options.clip_norm);
      ++result.updates;
      const double lr = InverseSqrtLearningRate(options.learning_rate, result.updates, options.warmup_steps);
      AdamStep(store, {lr, options.adam_beta1, options.adam_beta2, options.adam_eps});
    }
    const double mean = epoch_loss / static_cast<double>(epoch_tokens);
    result.loss_curve.push_back(mean);
    const bool stop = mean <= options.stop_loss;
    if (epoch % options.validate_every == 0 || epoch == options.epochs || stop) {
      const double score = validator ? validator(model) : -mean;
      result.validation.push_back({epoch, score});
      if (log) {
        std::ostringstream msg;
        msg << "epoch " << epoch << " loss " << mean << " validation " << score;
        log(msg.str());
      }
      if (!have_best || score > result.best_score) {
        have_best = true;
        result.best_score = score;
        result.best_epoch = epoch;
        best = Snapshot(store);
        if (!options.checkpoint_dir.empty()) {
          model.Save((std::filesystem::path(options.checkpoint_dir) / "best.ckpt").string());
        }
      }
      if (!options.checkpoint_dir.empty()) {
        model.Save((std::filesystem::path(options.checkpoint_dir) / "last.ckpt").string());
      }
    }
    if (stop) break;
  }
  if (options.restore_best && have_best) RestoreParameters(store, best);
  return result;
}

}  // namespace isomt::inline ISOMT_STORAGE
