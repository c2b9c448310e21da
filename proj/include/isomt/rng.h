#pragma once

#include <cstdint>
#include <string_view>

namespace isomt {

// Counter-based splittable generator. A stream is a (key, counter) pair; every
// draw hashes key and counter with the SplitMix64 finalizer, so streams split
// by name never overlap and results do not depend on the C++ library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : key_(Mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

  Rng Split(std::string_view name) const;
  Rng Split(std::uint64_t index) const;

  std::uint64_t NextU64();
  // Uniform in [0, 1).
  double Uniform();
  // Uniform integer in [lo, hi].
  long UniformInt(long lo, long hi);
  double Normal();
  bool Bernoulli(double p) { return Uniform() < p; }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  static std::uint64_t Mix(std::uint64_t z);
  static std::uint64_t HashString(std::string_view s);

 private:
  Rng(std::uint64_t key, std::uint64_t counter) : key_(key), counter_(counter) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace isomt
