#include "isomt/optim.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "isomt/errors.h"

namespace isomt::inline ISOMT_STORAGE {

Tensor& ParameterStore::Add(const std::string& name, Tensor value) {
  if (params_.contains(name)) throw ConfigError("duplicate parameter name: " + name);
  value.node()->requires_grad = true;
  auto [it, inserted] = params_.emplace(name, std::move(value));
  Moments& mo = moments_[name];
  mo.m.assign(it->second.numel(), 0.0f);
  mo.v.assign(it->second.numel(), 0.0f);
  return it->second;
}

Tensor& ParameterStore::AddXavier(const std::string& name, Shape shape, const Rng& rng) {
  const std::size_t fan_out = shape.empty() ? 1 : shape.front();
  const std::size_t fan_in = shape.size() < 2 ? 1 : shape.back();
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Rng stream = rng.Split(name);
  std::vector<Real> data(NumElements(shape));
  for (Real& v : data) v = static_cast<Real>((2.0 * stream.Uniform() - 1.0) * limit);
  return Add(name, Tensor::FromData(std::move(shape), std::move(data), true));
}

Tensor& ParameterStore::AddConstant(const std::string& name, Shape shape, Real value) {
  const std::size_t n = NumElements(shape);
  return Add(name, Tensor::FromData(std::move(shape), std::vector<Real>(n, value), true));
}

Tensor& ParameterStore::Get(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("unknown parameter: " + name);
  return it->second;
}

const Tensor& ParameterStore::Get(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("unknown parameter: " + name);
  return it->second;
}

std::size_t ParameterStore::NumValues() const {
  std::size_t n = 0;
  for (const auto& [name, p] : params_) n += p.numel();
  return n;
}

void ParameterStore::ZeroGrad() {
  for (auto& [name, p] : params_) p.ZeroGrad();
}

double ParameterStore::ClipGradNorm(double max_norm) {
  double sq = 0.0;
  for (const auto& [name, p] : params_)
    for (Real g : p.grad()) sq += static_cast<double>(g) * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const auto scale = static_cast<Real>(max_norm / norm);
    for (auto& [name, p] : params_)
      if (p.has_grad())
        for (Real& g : p.mutable_grad()) g *= scale;
  }
  return norm;
}

void AdamStep(ParameterStore& store, const AdamOptions& options) {
  for (const auto& [name, p] : store.params_) {
    if (!p.has_grad()) throw TrainingError("parameter has no gradient: " + name);
  }
  ++store.step_;
  const double t = static_cast<double>(store.step_);
  const double bc1 = 1.0 - std::pow(options.beta1, t);
  const double bc2 = 1.0 - std::pow(options.beta2, t);
  for (auto& [name, p] : store.params_) {
    auto& mo = store.moments_.at(name);
    auto data = p.mutable_data();
    const auto grad = p.grad();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double g = grad[i];
      const double m = options.beta1 * mo.m[i] + (1.0 - options.beta1) * g;
      const double v = options.beta2 * mo.v[i] + (1.0 - options.beta2) * g * g;
      mo.m[i] = static_cast<Real>(m);
      mo.v[i] = static_cast<Real>(v);
      const double update = options.lr * (m / bc1) / (std::sqrt(v / bc2) + options.eps);
      data[i] = static_cast<Real>(data[i] - update);
    }
    p.ZeroGrad();
  }
}

double InverseSqrtLearningRate(double base_lr, std::int64_t step, std::int64_t warmup) {
  const double s = static_cast<double>(std::max<std::int64_t>(step, 1));
  if (warmup <= 0) return base_lr;
  const double w = static_cast<double>(warmup);
  return base_lr * std::min(s / w, std::sqrt(w / s));
}

namespace {

constexpr char kMagic[8] = {'I', 'S', 'O', 'M', 'T', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void WriteLE(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T ReadLE(std::istream& in, const std::string& path) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw ParseError("truncated checkpoint " + path, -1);
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

std::string ReadString(std::istream& in, std::uint32_t n, const std::string& path) {
  std::string s(n, '\0');
  if (n > 0 && !in.read(s.data(), n)) throw ParseError("truncated checkpoint " + path, -1);
  return s;
}

}  // namespace

void SaveCheckpoint(const std::string& path, const ParameterStore& store,
                    const std::string& manifest) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint " + path);
  out.write(kMagic, sizeof(kMagic));
  WriteLE<std::uint32_t>(out, kVersion);
  WriteLE<std::uint32_t>(out, static_cast<std::uint32_t>(manifest.size()));
  out.write(manifest.data(), static_cast<std::streamsize>(manifest.size()));
  WriteLE<std::uint32_t>(out, static_cast<std::uint32_t>(store.params().size()));
  for (const auto& [name, p] : store.params()) {
    WriteLE<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    WriteLE<std::uint32_t>(out, static_cast<std::uint32_t>(p.rank()));
    for (std::size_t d : p.shape()) WriteLE<std::uint64_t>(out, d);
    for (Real v : p.data()) WriteLE<float>(out, static_cast<float>(v));
  }
  if (!out) throw Error("failed writing checkpoint " + path);
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path);
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw ParseError("not a checkpoint file: " + path, -1);
  }
  const auto version = ReadLE<std::uint32_t>(in, path);
  if (version != kVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version), -1);
  }
  Checkpoint ckpt;
  ckpt.manifest = ReadString(in, ReadLE<std::uint32_t>(in, path), path);
  const auto count = ReadLE<std::uint32_t>(in, path);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = ReadString(in, ReadLE<std::uint32_t>(in, path), path);
    const auto rank = ReadLE<std::uint32_t>(in, path);
    Shape shape(rank);
    for (auto& d : shape) d = ReadLE<std::uint64_t>(in, path);
    std::vector<Real> data(NumElements(shape));
    for (Real& v : data) v = ReadLE<float>(in, path);
    ckpt.params.emplace(std::move(name), Tensor::FromData(std::move(shape), std::move(data)));
  }
  return ckpt;
}

void RestoreParameters(ParameterStore& store, const Checkpoint& checkpoint) {
  if (checkpoint.params.size() != store.params().size()) {
    throw ConfigError("checkpoint holds " + std::to_string(checkpoint.params.size()) +
                      " parameters, model expects " +
                      std::to_string(store.params().size()));
  }
  for (auto& [name, p] : store.params()) {
    auto it = checkpoint.params.find(name);
    if (it == checkpoint.params.end()) throw ConfigError("checkpoint lacks parameter " + name);
    if (it->second.shape() != p.shape()) {
      throw DimensionError("parameter " + name + ": checkpoint shape " +
                           ShapeString(it->second.shape()) + " vs model " +
                           ShapeString(p.shape()));
    }
    std::copy(it->second.data().begin(), it->second.data().end(), p.mutable_data().begin());
  }
}

}  // namespace isomt::inline ISOMT_STORAGE
