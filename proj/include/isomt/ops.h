#pragma once

#include "isomt/real.h"

#include <span>
#include <vector>

#include "isomt/rng.h"
#include "isomt/tensor.h"

namespace isomt::inline ISOMT_STORAGE::ops {

// Matrix products on rank-2 tensors.
Tensor MatMul(const Tensor& a, const Tensor& b);
// a * transpose(b)
Tensor MatMulNT(const Tensor& a, const Tensor& b);

Tensor Add(const Tensor& a, const Tensor& b);
// Broadcasts a [1, n] row over every row of x.
Tensor AddRow(const Tensor& x, const Tensor& row);
Tensor Scale(const Tensor& x, Real factor);
// Σ weights[i] * terms[i]; all terms share one shape.
Tensor WeightedSum(std::span<const Tensor> terms, std::span<const Real> weights);

// Σ a[i] * b[i] as a scalar.
Tensor SumOfProducts(const Tensor& a, const Tensor& b);

Tensor Relu(const Tensor& x);
// tanh approximation.
Tensor Gelu(const Tensor& x);

// Normalizes each row, then applies the [1, n] affine gamma/beta.
Tensor LayerNorm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                 Real eps = 1e-5f);

Tensor Softmax(const Tensor& x);
// Row-wise softmax where column j > row i is excluded when causal is set.
Tensor MaskedSoftmax(const Tensor& x, bool causal);

// Single-head scaled dot-product attention over rank-2 q [tq, d], k [tk, d],
// v [tk, dv]. When weights is non-null it receives the [tq, tk] attention
// probabilities, row-major.
Tensor Attention(const Tensor& q, const Tensor& k, const Tensor& v, bool causal,
                 std::vector<Real>* weights = nullptr);

// Inverted dropout; identity when !training or p == 0.
Tensor Dropout(const Tensor& x, Real p, Rng& rng, bool training);

// Gathers rows of table [vocab, dim] for each id.
Tensor Embedding(const Tensor& table, std::span<const int> ids);

Tensor ConcatCols(std::span<const Tensor> parts);
Tensor SliceCols(const Tensor& x, std::size_t begin, std::size_t width);
Tensor SliceRows(const Tensor& x, std::size_t begin, std::size_t count);

// Mean label-smoothed cross-entropy over rows whose target != ignore_index.
// The smoothed target puts (1 - smoothing) on the gold id and smoothing / V
// uniformly on every id.
Tensor SoftmaxCrossEntropy(const Tensor& logits, std::span<const int> targets,
                           Real label_smoothing, int ignore_index = -1);

// Log-softmax of one row, no graph.
std::vector<Real> LogSoftmaxRow(std::span<const Real> logits);

}  // namespace isomt::ops
