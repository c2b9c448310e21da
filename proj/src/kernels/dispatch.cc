#include <atomic>
#include <cstdlib>
#include <string>
#include <vector>

#include "isomt/errors.h"
#include "isomt/kernels.h"

namespace isomt::inline ISOMT_STORAGE::kernels {
namespace {

bool HostHasAvx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* Lookup(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return &scalar::Table();
    case Isa::kAvx2:
      return HostHasAvx2() ? avx2::Table() : nullptr;
  }
  return nullptr;
}

const KernelTable* Initial() {
  const char* env = std::getenv("ISOMT_ISA");
  if (env != nullptr && std::string(env) == "scalar") return &scalar::Table();
  if (const KernelTable* t = Lookup(Isa::kAvx2)) return t;
  return &scalar::Table();
}

std::atomic<const KernelTable*>& Current() {
  static std::atomic<const KernelTable*> current{Initial()};
  return current;
}

}  // namespace

bool IsaAvailable(Isa isa) { return Lookup(isa) != nullptr; }

std::string_view IsaName(Isa isa) {
  return isa == Isa::kAvx2 ? "avx2" : "scalar";
}

Isa ActiveIsa() { return Active().isa; }

void SetIsa(Isa isa) {
  const KernelTable* t = Lookup(isa);
  if (t == nullptr) {
    throw ConfigError("kernel ISA " + std::string(IsaName(isa)) +
                      " is not available on this host");
  }
  Current().store(t);
}

const KernelTable& Active() { return *Current().load(std::memory_order_relaxed); }

void Gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
          std::size_t k, const Real* a, const Real* b, Real* c,
          bool accumulate) {
  const KernelTable& kt = Active();
  // Pack so that both operands are walked along k contiguously.
  thread_local std::vector<Real> a_pack;
  thread_local std::vector<Real> b_pack;
  const Real* a_rows = a;
  if (trans_a) {
    a_pack.resize(m * k);
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t i = 0; i < m; ++i) a_pack[i * k + p] = a[p * m + i];
    a_rows = a_pack.data();
  }
  const Real* b_rows = b;
  if (!trans_b) {
    b_pack.resize(n * k);
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t j = 0; j < n; ++j) b_pack[j * k + p] = b[p * n + j];
    b_rows = b_pack.data();
  }
  double block[4];
  for (std::size_t i = 0; i < m; ++i) {
    const Real* ai = a_rows + i * k;
    Real* ci = c + i * n;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      kt.dot4(ai, b_rows + j * k, k, k, block);
      for (int r = 0; r < 4; ++r) {
        const auto v = static_cast<Real>(block[r]);
        ci[j + r] = accumulate ? ci[j + r] + v : v;
      }
    }
    for (; j < n; ++j) {
      const auto v = static_cast<Real>(kt.dot(ai, b_rows + j * k, k));
      ci[j] = accumulate ? ci[j] + v : v;
    }
  }
}

}  // namespace isomt::inline ISOMT_STORAGE::kernels
