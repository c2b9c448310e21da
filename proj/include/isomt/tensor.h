#pragma once

#include "isomt/real.h"

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace isomt::inline ISOMT_STORAGE {

using Shape = std::vector<std::size_t>;

std::string ShapeString(const Shape& shape);
std::size_t NumElements(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<Real> data;
  // Allocated on first accumulation.
  std::vector<Real> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  std::vector<Real>& Grad() {
    if (grad.empty()) grad.assign(data.size(), 0.0f);
    return grad;
  }
};

}  // namespace detail

// Dense float32 array with reverse-mode gradient tracking. Copies share
// storage; a Tensor is a handle to a graph node.
class Tensor {
 public:
  Tensor() = default;

  static Tensor Zeros(Shape shape, bool requires_grad = false);
  static Tensor FromData(Shape shape, std::vector<Real> data,
                         bool requires_grad = false);
  static Tensor Scalar(Real value);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t numel() const { return node_->data.size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const Real> data() const { return node_->data; }
  // Mutation is meant for parameters and test setup, not graph interiors.
  std::span<Real> mutable_data() { return node_->data; }
  Real at(std::size_t r, std::size_t c) const { return node_->data[r * cols() + c]; }
  Real item() const;

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const Real> grad() const { return node_->grad; }
  std::span<Real> mutable_grad() { return node_->Grad(); }
  void ZeroGrad() { node_->grad.clear(); }

  // Seeds d(self)/d(self) = 1 and propagates through the graph. Leaves
  // accumulate into their existing gradients.
  void Backward();

  detail::Node* node() const { return node_.get(); }
  const std::shared_ptr<detail::Node>& handle() const { return node_; }

  // Builds an op result. Parents and the backward closure are kept only when
  // gradient recording is on and some parent requires a gradient.
  static Tensor MakeResult(Shape shape, std::vector<Real> data,
                           std::vector<Tensor> parents,
                           std::function<void(detail::Node&)> backward);

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;
};

bool GradEnabled();

// Disables graph recording for its lifetime (inference).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace isomt::inline ISOMT_STORAGE
