#include "isomt/tensor.h"

#include <unordered_set>

#include "isomt/errors.h"

namespace isomt::inline ISOMT_STORAGE {
namespace {
thread_local bool g_grad_enabled = true;
}

std::string ShapeString(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

std::size_t NumElements(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

Tensor Tensor::Zeros(Shape shape, bool requires_grad) {
  const std::size_t n = NumElements(shape);
  return FromData(std::move(shape), std::vector<Real>(n, 0.0f), requires_grad);
}

Tensor Tensor::FromData(Shape shape, std::vector<Real> data, bool requires_grad) {
  if (NumElements(shape) != data.size()) {
    throw DimensionError("shape " + ShapeString(shape) + " does not hold " +
                         std::to_string(data.size()) + " values");
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::Scalar(Real value) { return FromData({}, {value}); }

std::size_t Tensor::rows() const {
  if (rank() != 2) throw DimensionError("expected a matrix, got " + ShapeString(shape()));
  return node_->shape[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw DimensionError("expected a matrix, got " + ShapeString(shape()));
  return node_->shape[1];
}

Real Tensor::item() const {
  if (numel() != 1) throw DimensionError("item() on tensor of shape " + ShapeString(shape()));
  return node_->data[0];
}

Tensor Tensor::MakeResult(Shape shape, std::vector<Real> data,
                          std::vector<Tensor> parents,
                          std::function<void(detail::Node&)> backward) {
  Tensor out = FromData(std::move(shape), std::move(data));
  if (!g_grad_enabled) return out;
  bool needs = false;
  for (const Tensor& p : parents) needs = needs || p.requires_grad();
  if (!needs) return out;
  out.node_->requires_grad = true;
  out.node_->parents.reserve(parents.size());
  for (Tensor& p : parents) out.node_->parents.push_back(std::move(p.node_));
  out.node_->backward = std::move(backward);
  return out;
}

void Tensor::Backward() {
  if (!node_->requires_grad) {
    throw TrainingError("backward() on a tensor that does not require grad");
  }
  // Iterative post-order DFS gives a topological order.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      detail::Node* p = n->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  auto& g = node_->Grad();
  for (Real& v : g) v += 1.0f;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* n = *it;
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
}

bool GradEnabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

}  // namespace isomt::inline ISOMT_STORAGE
