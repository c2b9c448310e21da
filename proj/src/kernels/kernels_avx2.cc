#include "isomt/kernels.h"

#if defined(__x86_64__) && defined(__AVX2__) && defined(__FMA__) && \
    !defined(ISOMT_DOUBLE_STORAGE)
#include <immintrin.h>

namespace isomt::inline ISOMT_STORAGE::kernels::avx2 {
namespace {

inline double HorizontalSum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Widen 8 floats into two double lanes and accumulate their products.
inline void FmaWide(const float* a, const float* b, __m256d& acc_lo,
                    __m256d& acc_hi) {
  const __m256 va = _mm256_loadu_ps(a);
  const __m256 vb = _mm256_loadu_ps(b);
  acc_lo = _mm256_fmadd_pd(_mm256_cvtps_pd(_mm256_castps256_ps128(va)),
                           _mm256_cvtps_pd(_mm256_castps256_ps128(vb)), acc_lo);
  acc_hi = _mm256_fmadd_pd(_mm256_cvtps_pd(_mm256_extractf128_ps(va, 1)),
                           _mm256_cvtps_pd(_mm256_extractf128_ps(vb, 1)), acc_hi);
}

double Dot(const float* a, const float* b, std::size_t n) {
  __m256d lo = _mm256_setzero_pd();
  __m256d hi = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) FmaWide(a + i, b + i, lo, hi);
  double acc = HorizontalSum(_mm256_add_pd(lo, hi));
  for (; i < n; ++i) acc += static_cast<double>(a[i]) * b[i];
  return acc;
}

void Dot4(const float* a, const float* b, std::size_t ldb, std::size_t n,
          double* out) {
  __m256d acc[4][2];
  for (auto& row : acc) row[0] = row[1] = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 va = _mm256_loadu_ps(a + i);
    const __m256d a_lo = _mm256_cvtps_pd(_mm256_castps256_ps128(va));
    const __m256d a_hi = _mm256_cvtps_pd(_mm256_extractf128_ps(va, 1));
    for (int r = 0; r < 4; ++r) {
      const __m256 vb = _mm256_loadu_ps(b + r * ldb + i);
      acc[r][0] = _mm256_fmadd_pd(a_lo, _mm256_cvtps_pd(_mm256_castps256_ps128(vb)),
                                  acc[r][0]);
      acc[r][1] = _mm256_fmadd_pd(a_hi, _mm256_cvtps_pd(_mm256_extractf128_ps(vb, 1)),
                                  acc[r][1]);
    }
  }
  for (int r = 0; r < 4; ++r) {
    double s = HorizontalSum(_mm256_add_pd(acc[r][0], acc[r][1]));
    for (std::size_t j = i; j < n; ++j) s += static_cast<double>(a[j]) * b[r * ldb + j];
    out[r] = s;
  }
}

void Axpy(float alpha, const float* x, float* y, std::size_t n) {
  const __m256 va = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i),
                                            _mm256_loadu_ps(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double Sum(const float* x, std::size_t n) {
  __m256d lo = _mm256_setzero_pd();
  __m256d hi = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 v = _mm256_loadu_ps(x + i);
    lo = _mm256_add_pd(lo, _mm256_cvtps_pd(_mm256_castps256_ps128(v)));
    hi = _mm256_add_pd(hi, _mm256_cvtps_pd(_mm256_extractf128_ps(v, 1)));
  }
  double acc = HorizontalSum(_mm256_add_pd(lo, hi));
  for (; i < n; ++i) acc += x[i];
  return acc;
}

}  // namespace

const KernelTable* Table() {
  static const KernelTable table{Isa::kAvx2, &Dot, &Dot4, &Axpy, &Sum};
  return &table;
}

}  // namespace isomt::kernels::avx2

#else

namespace isomt::inline ISOMT_STORAGE::kernels::avx2 {
const KernelTable* Table() { return nullptr; }
}  // namespace isomt::kernels::avx2

#endif
