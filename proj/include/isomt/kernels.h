#pragma once

#include "isomt/real.h"

// Inner-loop kernels behind the tensor ops. Every kernel has a portable scalar
// reference; an AVX2+FMA variant is compiled separately and picked at startup
// when the host supports it. Reductions accumulate in double.

#include <cstddef>
#include <string_view>

namespace isomt::inline ISOMT_STORAGE::kernels {

enum class Isa { kScalar, kAvx2 };

struct KernelTable {
  Isa isa;
  double (*dot)(const Real* a, const Real* b, std::size_t n);
  // out[r] = dot(a, b + r * ldb) for r in [0, 4).
  void (*dot4)(const Real* a, const Real* b, std::size_t ldb, std::size_t n,
               double* out);
  // y += alpha * x
  void (*axpy)(Real alpha, const Real* x, Real* y, std::size_t n);
  double (*sum)(const Real* x, std::size_t n);
};

namespace scalar {
const KernelTable& Table();
}
namespace avx2 {
// Null when the variant was not compiled in.
const KernelTable* Table();
}

bool IsaAvailable(Isa isa);
std::string_view IsaName(Isa isa);
// Best available ISA unless ISOMT_ISA=scalar is set in the environment.
Isa ActiveIsa();
// Forces a kernel set; throws if the ISA is unavailable on this host.
void SetIsa(Isa isa);
const KernelTable& Active();

inline double Dot(const Real* a, const Real* b, std::size_t n) {
  return Active().dot(a, b, n);
}
inline void Axpy(Real alpha, const Real* x, Real* y, std::size_t n) {
  Active().axpy(alpha, x, y, n);
}
inline double Sum(const Real* x, std::size_t n) { return Active().sum(x, n); }

// Row-major C[m,n] (+)= op(A)[m,k] * op(B)[k,n]. op transposes when the flag
// is set, so A is stored k-by-m when trans_a and B is n-by-k when trans_b.
void Gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
          std::size_t k, const Real* a, const Real* b, Real* c,
          bool accumulate);

}  // namespace isomt::inline ISOMT_STORAGE::kernels
