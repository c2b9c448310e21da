#pragma once

#include "isomt/real.h"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "isomt/rng.h"
#include "isomt/tensor.h"

namespace isomt::inline ISOMT_STORAGE {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-9;
};

// Named trainable parameters plus the Adam moments kept under the same names.
class ParameterStore {
 public:
  // Registers a parameter; names must be unique.
  Tensor& Add(const std::string& name, Tensor value);
  // Registers a parameter drawn uniformly from [-limit, limit] with
  // limit = sqrt(6 / (fan_in + fan_out)) using a stream split from rng by
  // name, so unrelated parameters never perturb each other's values.
  Tensor& AddXavier(const std::string& name, Shape shape, const Rng& rng);
  Tensor& AddConstant(const std::string& name, Shape shape, Real value);

  bool Contains(const std::string& name) const { return params_.contains(name); }
  Tensor& Get(const std::string& name);
  const Tensor& Get(const std::string& name) const;
  const std::map<std::string, Tensor>& params() const { return params_; }
  std::map<std::string, Tensor>& params() { return params_; }

  std::size_t NumValues() const;
  void ZeroGrad();
  // Rescales all gradients so their global L2 norm is at most max_norm.
  // Returns the norm before clipping.
  double ClipGradNorm(double max_norm);

  struct Moments {
    std::vector<Real> m;
    std::vector<Real> v;
  };
  const std::map<std::string, Moments>& moments() const { return moments_; }
  std::int64_t step() const { return step_; }

 private:
  friend void AdamStep(ParameterStore&, const AdamOptions&);
  std::map<std::string, Tensor> params_;
  std::map<std::string, Moments> moments_;
  std::int64_t step_ = 0;
};

// One bias-corrected Adam update over every parameter, then clears the
// gradients. Throws TrainingError if any parameter has no gradient.
void AdamStep(ParameterStore& store, const AdamOptions& options);

// Linear warmup, then decay with the inverse square root of the step.
double InverseSqrtLearningRate(double base_lr, std::int64_t step, std::int64_t warmup);

// Binary checkpoint: versioned header, a free-form manifest string, then each
// parameter's name, shape and little-endian float32 payload.
struct Checkpoint {
  std::string manifest;
  std::map<std::string, Tensor> params;
};

void SaveCheckpoint(const std::string& path, const ParameterStore& store,
                    const std::string& manifest);
Checkpoint LoadCheckpoint(const std::string& path);
// Copies checkpoint values into an existing store; names and shapes must match.
void RestoreParameters(ParameterStore& store, const Checkpoint& checkpoint);

}  // namespace isomt::inline ISOMT_STORAGE
