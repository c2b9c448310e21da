#pragma once

// Storage precision. Production builds store float32; the gradient-check
// build compiles the same sources with ISOMT_DOUBLE_STORAGE so finite
// differences are not swamped by float32 rounding. The two builds live in
// distinct inline namespaces and can be linked into one binary.
#if defined(ISOMT_DOUBLE_STORAGE)
#define ISOMT_STORAGE f64
#else
#define ISOMT_STORAGE f32
#endif

namespace isomt::inline ISOMT_STORAGE {
#if defined(ISOMT_DOUBLE_STORAGE)
using Real = double;
#else
using Real = float;
#endif
}  // namespace isomt::inline ISOMT_STORAGE
