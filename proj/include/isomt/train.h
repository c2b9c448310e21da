#pragma once

#include "isomt/real.h"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "isomt/model.h"

namespace isomt::inline ISOMT_STORAGE {

struct TrainOptions {
  int epochs = 600;
  // Target tokens per update; a batch holds whole sentences.
  int batch_tokens = 256;
  double learning_rate = 3e-3;
  int warmup_steps = 100;
  double clip_norm = 1.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.98;
  double adam_eps = 1e-9;
  std::uint64_t seed = 1;
  // Validation (and checkpointing when checkpoint_dir is set) every this many
  // epochs; the last epoch always counts.
  int validate_every = 50;
  std::string checkpoint_dir;
  // Stop once the epoch's mean training loss is at or below this value.
  double stop_loss = 0.0;
  // Reinstall the best-validated parameters when training ends.
  bool restore_best = true;
};

struct ValidationPoint {
  int epoch = 0;
  double score = 0.0;
};

struct TrainResult {
  // Token-weighted mean training loss per epoch.
  std::vector<double> loss_curve;
  std::vector<ValidationPoint> validation;
  int best_epoch = 0;
  double best_score = 0.0;
  std::int64_t updates = 0;
};

// Higher is better.
using Validator = std::function<double(const Model&)>;

// Token-weighted mean of the multi-head loss with dropout off.
double MeanLoss(const Model& model, const std::vector<TrainingPair>& data);

// Adam with inverse-square-root warmup and global-norm clipping over
// token-count batches. Without a validator the negative training loss is the
// selection score. Throws TrainingError on a non-finite loss.
TrainResult Train(Model& model, const std::vector<TrainingPair>& data, const TrainOptions& options,
                  const Validator& validator = {},
                  const std::function<void(const std::string&)>& log = {});

}  // namespace isomt::inline ISOMT_STORAGE
