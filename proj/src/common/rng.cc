#include "isomt/rng.h"

#include <cmath>
#include <numbers>

namespace isomt {

std::uint64_t Rng::Mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t Rng::HashString(std::string_view s) {
  // FNV-1a, then mixed.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return Mix(h);
}

Rng Rng::Split(std::string_view name) const {
  return Rng(Mix(key_ ^ HashString(name)), 0);
}

Rng Rng::Split(std::uint64_t index) const {
  return Rng(Mix(key_ + Mix(index + 0x3c6ef372fe94f82bULL)), 0);
}

std::uint64_t Rng::NextU64() {
  return Mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_);
}

double Rng::Uniform() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

long Rng::UniformInt(long lo, long hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<long>(NextU64() % span);
}

double Rng::Normal() {
  // Box-Muller; one variate per call keeps the stream position predictable.
  double u1 = Uniform();
  while (u1 <= 0.0) u1 = Uniform();
  const double u2 = Uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace isomt
