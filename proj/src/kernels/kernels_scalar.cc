#include "isomt/kernels.h"

namespace isomt::inline ISOMT_STORAGE::kernels::scalar {
namespace {

double Dot(const Real* a, const Real* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return acc;
}

void Dot4(const Real* a, const Real* b, std::size_t ldb, std::size_t n,
          double* out) {
  double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
  const Real* b0 = b;
  const Real* b1 = b + ldb;
  const Real* b2 = b + 2 * ldb;
  const Real* b3 = b + 3 * ldb;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = a[i];
    acc0 += x * b0[i];
    acc1 += x * b1[i];
    acc2 += x * b2[i];
    acc3 += x * b3[i];
  }
  out[0] = acc0;
  out[1] = acc1;
  out[2] = acc2;
  out[3] = acc3;
}

void Axpy(Real alpha, const Real* x, Real* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double Sum(const Real* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

}  // namespace

const KernelTable& Table() {
  static const KernelTable table{Isa::kScalar, &Dot, &Dot4, &Axpy, &Sum};
  return table;
}

}  // namespace isomt::kernels::scalar
