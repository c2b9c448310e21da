#include "isomt/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "isomt/errors.h"
#include "isomt/kernels.h"

namespace isomt::inline ISOMT_STORAGE::ops {
namespace {

using detail::Node;

void RequireMatrix(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected rank-2 tensor, got " +
                         ShapeString(t.shape()));
  }
}

void RequireSameShape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shapes " + ShapeString(a.shape()) +
                         " and " + ShapeString(b.shape()) + " differ");
  }
}

// Parent i's gradient buffer if it wants one, else null.
Real* ParentGrad(Node& self, std::size_t i) {
  Node& p = *self.parents[i];
  return p.requires_grad ? p.Grad().data() : nullptr;
}

}  // namespace

Tensor MatMul(const Tensor& a, const Tensor& b) {
  RequireMatrix(a, "matmul");
  RequireMatrix(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner dimensions of " + ShapeString(a.shape()) +
                         " and " + ShapeString(b.shape()) + " disagree");
  }
  std::vector<Real> out(m * n);
  kernels::Gemm(false, false, m, n, k, a.data().data(), b.data().data(), out.data(),
                false);
  return Tensor::MakeResult({m, n}, std::move(out), {a, b}, [m, n, k](Node& self) {
    const Real* g = self.grad.data();
    const Node& pa = *self.parents[0];
    const Node& pb = *self.parents[1];
    if (Real* ga = ParentGrad(self, 0)) {
      kernels::Gemm(false, true, m, k, n, g, pb.data.data(), ga, true);
    }
    if (Real* gb = ParentGrad(self, 1)) {
      kernels::Gemm(true, false, k, n, m, pa.data.data(), g, gb, true);
    }
  });
}

Tensor MatMulNT(const Tensor& a, const Tensor& b) {
  RequireMatrix(a, "matmul_nt");
  RequireMatrix(b, "matmul_nt");
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  if (b.cols() != k) {
    throw DimensionError("matmul_nt: inner dimensions of " + ShapeString(a.shape()) +
                         " and transposed " + ShapeString(b.shape()) + " disagree");
  }
  std::vector<Real> out(m * n);
  kernels::Gemm(false, true, m, n, k, a.data().data(), b.data().data(), out.data(),
                false);
  return Tensor::MakeResult({m, n}, std::move(out), {a, b}, [m, n, k](Node& self) {
    const Real* g = self.grad.data();
    const Node& pa = *self.parents[0];
    const Node& pb = *self.parents[1];
    if (Real* ga = ParentGrad(self, 0)) {
      kernels::Gemm(false, false, m, k, n, g, pb.data.data(), ga, true);
    }
    if (Real* gb = ParentGrad(self, 1)) {
      kernels::Gemm(true, false, n, k, m, g, pa.data.data(), gb, true);
    }
  });
}

Tensor Add(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "add");
  std::vector<Real> out(a.data().begin(), a.data().end());
  const auto bd = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bd[i];
  return Tensor::MakeResult(a.shape(), std::move(out), {a, b}, [](Node& self) {
    const std::size_t n = self.grad.size();
    for (std::size_t p = 0; p < 2; ++p) {
      if (Real* gp = ParentGrad(self, p)) kernels::Axpy(1.0f, self.grad.data(), gp, n);
    }
  });
}

Tensor AddRow(const Tensor& x, const Tensor& row) {
  RequireMatrix(x, "add_row");
  const std::size_t r = x.rows(), c = x.cols();
  if (row.numel() != c) {
    throw DimensionError("add_row: row " + ShapeString(row.shape()) +
                         " does not broadcast over " + ShapeString(x.shape()));
  }
  std::vector<Real> out(x.data().begin(), x.data().end());
  const auto bd = row.data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] += bd[j];
  return Tensor::MakeResult(x.shape(), std::move(out), {x, row}, [r, c](Node& self) {
    const Real* g = self.grad.data();
    if (Real* gx = ParentGrad(self, 0)) kernels::Axpy(1.0f, g, gx, r * c);
    if (Real* gb = ParentGrad(self, 1)) {
      for (std::size_t i = 0; i < r; ++i) kernels::Axpy(1.0f, g + i * c, gb, c);
    }
  });
}

Tensor Scale(const Tensor& x, Real factor) {
  std::vector<Real> out(x.data().begin(), x.data().end());
  for (Real& v : out) v *= factor;
  return Tensor::MakeResult(x.shape(), std::move(out), {x}, [factor](Node& self) {
    if (Real* gx = ParentGrad(self, 0))
      kernels::Axpy(factor, self.grad.data(), gx, self.grad.size());
  });
}

Tensor WeightedSum(std::span<const Tensor> terms, std::span<const Real> weights) {
  if (terms.empty() || terms.size() != weights.size()) {
    throw DimensionError("weighted_sum: " + std::to_string(terms.size()) +
                         " terms with " + std::to_string(weights.size()) + " weights");
  }
  std::vector<Real> out(terms[0].numel(), 0.0f);
  for (std::size_t t = 0; t < terms.size(); ++t) {
    RequireSameShape(terms[0], terms[t], "weighted_sum");
    const auto d = terms[t].data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += weights[t] * d[i];
  }
  std::vector<Real> w(weights.begin(), weights.end());
  return Tensor::MakeResult(terms[0].shape(), std::move(out),
                            std::vector<Tensor>(terms.begin(), terms.end()),
                            [w = std::move(w)](Node& self) {
                              for (std::size_t t = 0; t < w.size(); ++t) {
                                if (Real* gt = ParentGrad(self, t))
                                  kernels::Axpy(w[t], self.grad.data(), gt,
                                                self.grad.size());
                              }
                            });
}

Tensor SumOfProducts(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "sum_of_products");
  const double total = kernels::Dot(a.data().data(), b.data().data(), a.numel());
  return Tensor::MakeResult({}, {static_cast<Real>(total)}, {a, b}, [](Node& self) {
    const Real g = self.grad[0];
    const auto& ad = self.parents[0]->data;
    const auto& bd = self.parents[1]->data;
    if (Real* ga = ParentGrad(self, 0)) kernels::Axpy(g, bd.data(), ga, bd.size());
    if (Real* gb = ParentGrad(self, 1)) kernels::Axpy(g, ad.data(), gb, ad.size());
  });
}

Tensor Relu(const Tensor& x) {
  std::vector<Real> out(x.data().begin(), x.data().end());
  for (Real& v : out) v = v > 0.0f ? v : 0.0f;
  return Tensor::MakeResult(x.shape(), std::move(out), {x}, [](Node& self) {
    Real* gx = ParentGrad(self, 0);
    if (gx == nullptr) return;
    const auto& xd = self.parents[0]->data;
    for (std::size_t i = 0; i < xd.size(); ++i)
      if (xd[i] > 0.0f) gx[i] += self.grad[i];
  });
}

Tensor Gelu(const Tensor& x) {
  constexpr double kC = 0.7978845608028654;  // sqrt(2/pi)
  std::vector<Real> out(x.numel());
  const auto xd = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = xd[i];
    out[i] = static_cast<Real>(0.5 * v * (1.0 + std::tanh(kC * (v + 0.044715 * v * v * v))));
  }
  return Tensor::MakeResult(x.shape(), std::move(out), {x}, [](Node& self) {
    Real* gx = ParentGrad(self, 0);
    if (gx == nullptr) return;
    const auto& xd = self.parents[0]->data;
    for (std::size_t i = 0; i < xd.size(); ++i) {
      const double v = xd[i];
      const double u = kC * (v + 0.044715 * v * v * v);
      const double t = std::tanh(u);
      const double du = kC * (1.0 + 3.0 * 0.044715 * v * v);
      const double d = 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * du;
      gx[i] += static_cast<Real>(d * self.grad[i]);
    }
  });
}

Tensor LayerNorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, Real eps) {
  RequireMatrix(x, "layer_norm");
  const std::size_t r = x.rows(), c = x.cols();
  if (gamma.numel() != c || beta.numel() != c) {
    throw DimensionError("layer_norm: affine " + ShapeString(gamma.shape()) + "/" +
                         ShapeString(beta.shape()) + " vs input " +
                         ShapeString(x.shape()));
  }
  std::vector<Real> out(r * c);
  std::vector<Real> xhat(r * c);
  std::vector<Real> inv_std(r);
  const auto xd = x.data();
  const auto gd = gamma.data();
  const auto bd = beta.data();
  for (std::size_t i = 0; i < r; ++i) {
    const Real* row = xd.data() + i * c;
    const double mean = kernels::Sum(row, c) / static_cast<double>(c);
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= static_cast<double>(c);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[i] = static_cast<Real>(is);
    for (std::size_t j = 0; j < c; ++j) {
      const auto h = static_cast<Real>((row[j] - mean) * is);
      xhat[i * c + j] = h;
      out[i * c + j] = gd[j] * h + bd[j];
    }
  }
  return Tensor::MakeResult(
      x.shape(), std::move(out), {x, gamma, beta},
      [r, c, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& self) {
        const Real* g = self.grad.data();
        const auto& gd = self.parents[1]->data;
        Real* gx = ParentGrad(self, 0);
        Real* gg = ParentGrad(self, 1);
        Real* gb = ParentGrad(self, 2);
        std::vector<double> dxhat(c);
        for (std::size_t i = 0; i < r; ++i) {
          const Real* gi = g + i * c;
          const Real* hi = xhat.data() + i * c;
          if (gg != nullptr)
            for (std::size_t j = 0; j < c; ++j) gg[j] += gi[j] * hi[j];
          if (gb != nullptr)
            for (std::size_t j = 0; j < c; ++j) gb[j] += gi[j];
          if (gx == nullptr) continue;
          double mean_d = 0.0, mean_dh = 0.0;
          for (std::size_t j = 0; j < c; ++j) {
            dxhat[j] = static_cast<double>(gi[j]) * gd[j];
            mean_d += dxhat[j];
            mean_dh += dxhat[j] * hi[j];
          }
          mean_d /= static_cast<double>(c);
          mean_dh /= static_cast<double>(c);
          for (std::size_t j = 0; j < c; ++j) {
            gx[i * c + j] +=
                static_cast<Real>(inv_std[i] * (dxhat[j] - mean_d - hi[j] * mean_dh));
          }
        }
      });
}

Tensor MaskedSoftmax(const Tensor& x, bool causal) {
  RequireMatrix(x, "softmax");
  const std::size_t r = x.rows(), c = x.cols();
  std::vector<Real> out(r * c, 0.0f);
  const auto xd = x.data();
  for (std::size_t i = 0; i < r; ++i) {
    const std::size_t limit = causal ? std::min(c, i + 1) : c;
    const Real* row = xd.data() + i * c;
    Real mx = -std::numeric_limits<Real>::infinity();
    for (std::size_t j = 0; j < limit; ++j) mx = std::max(mx, row[j]);
    double total = 0.0;
    for (std::size_t j = 0; j < limit; ++j) total += std::exp(static_cast<double>(row[j] - mx));
    for (std::size_t j = 0; j < limit; ++j)
      out[i * c + j] = static_cast<Real>(std::exp(static_cast<double>(row[j] - mx)) / total);
  }
  return Tensor::MakeResult(x.shape(), out, {x}, [r, c, y = out](Node& self) {
    Real* gx = ParentGrad(self, 0);
    if (gx == nullptr) return;
    for (std::size_t i = 0; i < r; ++i) {
      const Real* yi = y.data() + i * c;
      const Real* gi = self.grad.data() + i * c;
      const double dot = kernels::Dot(yi, gi, c);
      for (std::size_t j = 0; j < c; ++j)
        gx[i * c + j] += static_cast<Real>(yi[j] * (gi[j] - dot));
    }
  });
}

Tensor Softmax(const Tensor& x) { return MaskedSoftmax(x, false); }

Tensor Attention(const Tensor& q, const Tensor& k, const Tensor& v, bool causal,
                 std::vector<Real>* weights) {
  RequireMatrix(q, "attention");
  RequireMatrix(k, "attention");
  RequireMatrix(v, "attention");
  if (k.rows() != v.rows()) {
    throw DimensionError("attention: keys " + ShapeString(k.shape()) +
                         " and values " + ShapeString(v.shape()) + " differ in length");
  }
  const Real scale = 1.0f / std::sqrt(static_cast<Real>(q.cols()));
  Tensor probs = MaskedSoftmax(Scale(MatMulNT(q, k), scale), causal);
  if (weights != nullptr) weights->assign(probs.data().begin(), probs.data().end());
  return MatMul(probs, v);
}

Tensor Dropout(const Tensor& x, Real p, Rng& rng, bool training) {
  if (!training || p <= 0.0f) return x;
  if (p >= 1.0f) throw ConfigError("dropout probability must be < 1");
  const Real keep_scale = 1.0f / (1.0f - p);
  std::vector<Real> mask(x.numel());
  for (Real& m : mask) m = rng.Uniform() >= p ? keep_scale : 0.0f;
  std::vector<Real> out(x.data().begin(), x.data().end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return Tensor::MakeResult(x.shape(), std::move(out), {x},
                            [mask = std::move(mask)](Node& self) {
                              Real* gx = ParentGrad(self, 0);
                              if (gx == nullptr) return;
                              for (std::size_t i = 0; i < mask.size(); ++i)
                                gx[i] += self.grad[i] * mask[i];
                            });
}

Tensor Embedding(const Tensor& table, std::span<const int> ids) {
  RequireMatrix(table, "embedding");
  const std::size_t vocab = table.rows(), dim = table.cols();
  std::vector<Real> out(ids.size() * dim);
  const auto td = table.data();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab) {
      throw VocabularyError("embedding id " + std::to_string(ids[i]) +
                            " outside vocabulary of size " + std::to_string(vocab));
    }
    std::copy_n(td.begin() + ids[i] * dim, dim, out.begin() + i * dim);
  }
  std::vector<int> idv(ids.begin(), ids.end());
  return Tensor::MakeResult({ids.size(), dim}, std::move(out), {table},
                            [dim, idv = std::move(idv)](Node& self) {
                              Real* gt = ParentGrad(self, 0);
                              if (gt == nullptr) return;
                              for (std::size_t i = 0; i < idv.size(); ++i)
                                kernels::Axpy(1.0f, self.grad.data() + i * dim,
                                              gt + idv[i] * dim, dim);
                            });
}

Tensor ConcatCols(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  const std::size_t r = parts[0].rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    if (p.rows() != r) {
      throw DimensionError("concat: row counts " + ShapeString(parts[0].shape()) +
                           " and " + ShapeString(p.shape()) + " differ");
    }
    widths.push_back(p.cols());
    total += p.cols();
  }
  std::vector<Real> out(r * total);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto d = parts[k].data();
    for (std::size_t i = 0; i < r; ++i)
      std::copy_n(d.begin() + i * widths[k], widths[k], out.begin() + i * total + offset);
    offset += widths[k];
  }
  return Tensor::MakeResult({r, total}, std::move(out),
                            std::vector<Tensor>(parts.begin(), parts.end()),
                            [r, total, widths = std::move(widths)](Node& self) {
                              std::size_t off = 0;
                              for (std::size_t k = 0; k < widths.size(); ++k) {
                                if (Real* gp = ParentGrad(self, k)) {
                                  for (std::size_t i = 0; i < r; ++i)
                                    kernels::Axpy(1.0f, self.grad.data() + i * total + off,
                                                  gp + i * widths[k], widths[k]);
                                }
                                off += widths[k];
                              }
                            });
}

Tensor SliceCols(const Tensor& x, std::size_t begin, std::size_t width) {
  RequireMatrix(x, "slice");
  const std::size_t r = x.rows(), c = x.cols();
  if (begin + width > c) {
    throw DimensionError("slice: columns [" + std::to_string(begin) + ", " +
                         std::to_string(begin + width) + ") outside " +
                         ShapeString(x.shape()));
  }
  std::vector<Real> out(r * width);
  const auto d = x.data();
  for (std::size_t i = 0; i < r; ++i)
    std::copy_n(d.begin() + i * c + begin, width, out.begin() + i * width);
  return Tensor::MakeResult({r, width}, std::move(out), {x},
                            [r, c, begin, width](Node& self) {
                              Real* gx = ParentGrad(self, 0);
                              if (gx == nullptr) return;
                              for (std::size_t i = 0; i < r; ++i)
                                kernels::Axpy(1.0f, self.grad.data() + i * width,
                                              gx + i * c + begin, width);
                            });
}

Tensor SliceRows(const Tensor& x, std::size_t begin, std::size_t count) {
  RequireMatrix(x, "slice_rows");
  const std::size_t c = x.cols();
  if (begin + count > x.rows()) {
    throw DimensionError("slice_rows: rows [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") outside " +
                         ShapeString(x.shape()));
  }
  const auto d = x.data();
  std::vector<Real> out(d.begin() + begin * c, d.begin() + (begin + count) * c);
  return Tensor::MakeResult({count, c}, std::move(out), {x}, [begin, c](Node& self) {
    Real* gx = ParentGrad(self, 0);
    if (gx == nullptr) return;
    kernels::Axpy(1.0f, self.grad.data(), gx + begin * c, self.grad.size());
  });
}

Tensor SoftmaxCrossEntropy(const Tensor& logits, std::span<const int> targets,
                           Real label_smoothing, int ignore_index) {
  RequireMatrix(logits, "cross_entropy");
  const std::size_t r = logits.rows(), v = logits.cols();
  if (targets.size() != r) {
    throw DimensionError("cross_entropy: " + std::to_string(targets.size()) +
                         " targets for logits " + ShapeString(logits.shape()));
  }
  const double eps = label_smoothing;
  const double off = eps / static_cast<double>(v);
  const auto ld = logits.data();
  std::vector<Real> probs(r * v, 0.0f);
  double loss = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < r; ++i) {
    if (targets[i] == ignore_index) continue;
    if (targets[i] < 0 || static_cast<std::size_t>(targets[i]) >= v) {
      throw VocabularyError("target id " + std::to_string(targets[i]) +
                            " outside vocabulary of size " + std::to_string(v));
    }
    const Real* row = ld.data() + i * v;
    const Real mx = *std::max_element(row, row + v);
    double z = 0.0;
    for (std::size_t j = 0; j < v; ++j) z += std::exp(static_cast<double>(row[j] - mx));
    const double lse = std::log(z) + mx;
    double expected_logit = (1.0 - eps) * row[targets[i]];
    if (eps > 0.0) expected_logit += off * kernels::Sum(row, v);
    loss += lse - expected_logit;
    for (std::size_t j = 0; j < v; ++j)
      probs[i * v + j] = static_cast<Real>(std::exp(static_cast<double>(row[j]) - lse));
    ++counted;
  }
  const double denom = counted > 0 ? static_cast<double>(counted) : 1.0;
  std::vector<int> tv(targets.begin(), targets.end());
  return Tensor::MakeResult(
      {}, {static_cast<Real>(loss / denom)}, {logits},
      [r, v, eps, off, denom, ignore_index, tv = std::move(tv),
       probs = std::move(probs)](Node& self) {
        Real* gl = ParentGrad(self, 0);
        if (gl == nullptr) return;
        const double scale = self.grad[0] / denom;
        for (std::size_t i = 0; i < r; ++i) {
          if (tv[i] == ignore_index) continue;
          for (std::size_t j = 0; j < v; ++j) {
            double q = off;
            if (static_cast<int>(j) == tv[i]) q += 1.0 - eps;
            gl[i * v + j] += static_cast<Real>(scale * (probs[i * v + j] - q));
          }
        }
      });
}

std::vector<Real> LogSoftmaxRow(std::span<const Real> logits) {
  const Real mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (Real l : logits) z += std::exp(static_cast<double>(l - mx));
  const double lse = std::log(z) + mx;
  std::vector<Real> out(logits.size());
  for (std::size_t j = 0; j < logits.size(); ++j)
    out[j] = static_cast<Real>(logits[j] - lse);
  return out;
}

}  // namespace isomt::ops
