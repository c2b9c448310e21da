#include <cmath>
#include <vector>

#include "doctest.h"
#include "isomt/errors.h"
#include "isomt/ops.h"
#include "support/gradcheck.h"

namespace isomt::inline ISOMT_STORAGE::ops {
namespace {

using testing::GradCheck;
using testing::RandomTensor;

Tensor Matrix(std::size_t r, std::size_t c, std::vector<Real> v, bool grad = false) {
  return Tensor::FromData({r, c}, std::move(v), grad);
}

// Random linear readout so a tensor-valued op becomes a scalar loss.
Tensor Readout(const Tensor& x, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Real> w(x.numel());
  for (Real& v : w) v = static_cast<Real>(rng.Normal());
  return SumOfProducts(x, Tensor::FromData(x.shape(), std::move(w)));
}

// float32 storage puts ~1e-3 of rounding noise into h = 1e-4 central
// differences, so the strict bound is enforced on the float64 build.
#if defined(ISOMT_DOUBLE_STORAGE)
constexpr double kGradTolerance = 1e-3;
#else
constexpr double kGradTolerance = 1e-2;
#endif

void RequireGradientsMatch(const std::vector<testing::GradCheckResult>& results) {
  for (const auto& r : results) {
    INFO("input " << r.name << " relative error " << r.relative_error);
    CHECK(r.relative_error <= kGradTolerance);
  }
}

TEST_CASE("matmul hand-computable cases") {
  const Tensor id = Matrix(2, 2, {1, 0, 0, 1});
  const Tensor m = Matrix(2, 2, {1, 2, 3, 4});
  const Tensor out = MatMul(id, m);
  CHECK(std::vector<Real>(out.data().begin(), out.data().end()) ==
        std::vector<Real>{1, 2, 3, 4});
  CHECK(MatMul(Matrix(1, 2, {1, 2}), Matrix(2, 1, {3, 4})).item() == 11.0f);
}

TEST_CASE("matmul shape mismatch names both shapes") {
  try {
    MatMul(Matrix(2, 3, std::vector<Real>(6)), Matrix(2, 3, std::vector<Real>(6)));
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string what = e.what();
    CHECK(what.find("[2, 3]") != std::string::npos);
  }
}

TEST_CASE("matmul gradients match finite differences") {
  Rng rng(17);
  Tensor a = RandomTensor({4, 5}, rng);
  Tensor b = RandomTensor({5, 3}, rng);
  RequireGradientsMatch(GradCheck([&] { return Readout(MatMul(a, b), 1); }, {{"a", a}, {"b", b}}));
  Tensor c = RandomTensor({3, 5}, rng);
  RequireGradientsMatch(GradCheck([&] { return Readout(MatMulNT(a, c), 2); }, {{"a", a}, {"c", c}}));
}

TEST_CASE("cross-entropy values") {
  SUBCASE("uniform logits give ln V") {
    const Tensor logits = Matrix(2, 5, std::vector<Real>(10, 0.3f));
    const std::vector<int> targets{1, 4};
    CHECK(SoftmaxCrossEntropy(logits, targets, 0.0f).item() ==
          doctest::Approx(std::log(5.0)).epsilon(1e-6));
  }
  SUBCASE("favoured logit drives the loss towards zero") {
    const std::vector<int> targets{0};
    double previous = 1e9;
    for (Real gap : {1.0f, 5.0f, 20.0f}) {
      const double loss = SoftmaxCrossEntropy(Matrix(1, 3, {gap, 0, 0}), targets, 0.0f).item();
      CHECK(loss < previous);
      previous = loss;
    }
    CHECK(previous < 1e-7);
  }
  SUBCASE("smoothing 0.1 over 4 classes matches the direct formula") {
    const std::vector<Real> z{0.5f, -1.0f, 2.0f, 0.25f};
    const std::vector<int> targets{2};
    double lse = 0.0;
    for (Real v : z) lse += std::exp(static_cast<double>(v));
    lse = std::log(lse);
    double expected = 0.0;
    for (int j = 0; j < 4; ++j) {
      const double q = (j == 2 ? 0.9 : 0.0) + 0.1 / 4.0;
      expected -= q * (z[j] - lse);
    }
    CHECK(SoftmaxCrossEntropy(Matrix(1, 4, z), targets, 0.1f).item() ==
          doctest::Approx(expected).epsilon(1e-6));
  }
  SUBCASE("out-of-range target is a vocabulary error") {
    const std::vector<int> targets{4};
    CHECK_THROWS_AS(SoftmaxCrossEntropy(Matrix(1, 4, std::vector<Real>(4)), targets, 0.0f),
                    VocabularyError);
  }
  SUBCASE("ignored rows do not count") {
    const std::vector<int> targets{-1, 1};
    const Tensor logits = Matrix(2, 2, {9, -9, 0, 0});
    CHECK(SoftmaxCrossEntropy(logits, targets, 0.0f).item() ==
          doctest::Approx(std::log(2.0)).epsilon(1e-6));
  }
}

TEST_CASE("cross-entropy gradient matches finite differences") {
  Rng rng(5);
  Tensor logits = RandomTensor({3, 6}, rng);
  const std::vector<int> targets{0, 5, 2};
  RequireGradientsMatch(GradCheck(
      [&] { return SoftmaxCrossEntropy(logits, targets, 0.1f); }, {{"logits", logits}}));
}

TEST_CASE("layer norm of a constant row is zero before the affine") {
  const Tensor x = Matrix(1, 4, {3, 3, 3, 3});
  const Tensor gamma = Matrix(1, 4, {1, 1, 1, 1});
  const Tensor beta = Matrix(1, 4, {0, 0, 0, 0});
  const Tensor y = LayerNorm(x, gamma, beta);
  for (Real v : y.data()) CHECK(v == 0.0f);
}

TEST_CASE("elementwise and normalization gradients") {
  Rng rng(23);
  Tensor x = RandomTensor({3, 6}, rng);
  Tensor y = RandomTensor({3, 6}, rng);
  Tensor row = RandomTensor({1, 6}, rng);
  Tensor gamma = RandomTensor({1, 6}, rng);
  Tensor beta = RandomTensor({1, 6}, rng);
  RequireGradientsMatch(GradCheck([&] { return Readout(LayerNorm(x, gamma, beta), 3); },
                                  {{"x", x}, {"gamma", gamma}, {"beta", beta}}));
  RequireGradientsMatch(GradCheck([&] { return Readout(Gelu(x), 4); }, {{"x", x}}));
  RequireGradientsMatch(GradCheck([&] { return Readout(Relu(x), 5); }, {{"x", x}}));
  RequireGradientsMatch(GradCheck([&] { return Readout(Softmax(x), 6); }, {{"x", x}}));
  RequireGradientsMatch(
      GradCheck([&] { return Readout(AddRow(Add(x, y), row), 7); }, {{"x", x}, {"y", y}, {"row", row}}));
  std::vector<Tensor> parts{x, y};
  const std::vector<Real> weights{0.5f, -2.0f};
  RequireGradientsMatch(GradCheck(
      [&] { return Readout(SliceCols(ConcatCols(parts), 2, 7), 8); }, {{"x", x}, {"y", y}}));
  RequireGradientsMatch(GradCheck([&] { return Readout(SliceRows(x, 1, 2), 10); }, {{"x", x}}));
  RequireGradientsMatch(GradCheck(
      [&] { return Readout(WeightedSum(parts, weights), 9); }, {{"x", x}, {"y", y}}));
}

TEST_CASE("softmax rows sum to one") {
  Rng rng(1);
  const Tensor x = RandomTensor({5, 9}, rng, 4.0);
  const Tensor p = Softmax(x);
  for (std::size_t i = 0; i < 5; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < 9; ++j) s += p.at(i, j);
    CHECK(std::abs(s - 1.0) <= 1e-6);
  }
}

TEST_CASE("causal attention only looks backwards") {
  Rng rng(8);
  const Tensor q = RandomTensor({4, 3}, rng);
  const Tensor k = RandomTensor({4, 3}, rng);
  const Tensor v = RandomTensor({4, 2}, rng);
  std::vector<Real> weights;
  Attention(q, k, v, true, &weights);
  for (std::size_t t = 0; t < 4; ++t) {
    double row = 0.0;
    for (std::size_t s = 0; s < 4; ++s) {
      if (s > t) CHECK(weights[t * 4 + s] == 0.0f);
      row += weights[t * 4 + s];
    }
    CHECK(row == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("attention gradients match finite differences") {
  Rng rng(9);
  Tensor q = RandomTensor({4, 3}, rng);
  Tensor k = RandomTensor({5, 3}, rng);
  Tensor v = RandomTensor({5, 2}, rng);
  RequireGradientsMatch(GradCheck([&] { return Readout(Attention(q, k, v, false), 10); },
                                  {{"q", q}, {"k", k}, {"v", v}}));
  Tensor kq = RandomTensor({4, 3}, rng);
  Tensor vq = RandomTensor({4, 2}, rng);
  RequireGradientsMatch(GradCheck([&] { return Readout(Attention(q, kq, vq, true), 11); },
                                  {{"q", q}, {"k", kq}, {"v", vq}}));
}

TEST_CASE("embedding gathers rows and scatters gradients") {
  Rng rng(12);
  Tensor table = RandomTensor({6, 4}, rng);
  const std::vector<int> ids{2, 0, 2};
  const Tensor e = Embedding(table, ids);
  CHECK(e.at(0, 1) == table.at(2, 1));
  RequireGradientsMatch(GradCheck([&] { return Readout(Embedding(table, ids), 13); },
                                  {{"table", table}}));
  const std::vector<int> bad{6};
  CHECK_THROWS_AS(Embedding(table, bad), VocabularyError);
}

TEST_CASE("dropout is identity outside training and seed-deterministic inside") {
  Rng rng(1);
  const Tensor x = RandomTensor({4, 8}, rng);
  Rng a(99), b(99);
  CHECK(Dropout(x, 0.3f, a, false).node() == x.node());
  const Tensor d1 = Dropout(x, 0.3f, a, true);
  const Tensor d2 = Dropout(x, 0.3f, b, true);
  CHECK(std::vector<Real>(d1.data().begin(), d1.data().end()) ==
        std::vector<Real>(d2.data().begin(), d2.data().end()));
}

TEST_CASE("no-grad mode records no graph") {
  Rng rng(2);
  Tensor a = RandomTensor({2, 2}, rng);
  NoGradGuard guard;
  const Tensor out = MatMul(a, a);
  CHECK_FALSE(out.requires_grad());
}

}  // namespace
}  // namespace isomt::ops
