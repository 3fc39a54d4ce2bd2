#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "adrl/common.hpp"

namespace adrl::nd {

// Dynamically built computation graph over dense row-major matrices.
// All tensors are 2-D; vectors are [1,n] or [n,1], scalars [1,1].
// Ops never mutate their inputs; each call allocates a fresh node.
// Mutating a leaf's values (optimizer updates) invalidates graphs that
// were built from it, so losses must be consumed before stepping.

struct Node {
  int rows = 0;
  int cols = 0;
  std::vector<Real> value;
  std::vector<Real> grad;  // sized lazily by backward()
  bool requires_grad = false;
  bool is_leaf = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  std::size_t numel() const { return value.size(); }
};

class Tensor {
 public:
  Tensor() = default;

  static Tensor leaf(int rows, int cols, std::vector<Real> value,
                     bool requires_grad);
  static Tensor constant(int rows, int cols, std::vector<Real> value);
  static Tensor zeros(int rows, int cols, bool requires_grad = false);
  static Tensor full(int rows, int cols, Real v);
  static Tensor scalar(Real v);

  bool defined() const { return node_ != nullptr; }
  int rows() const { return node_->rows; }
  int cols() const { return node_->cols; }
  std::size_t numel() const { return node_->value.size(); }
  bool requires_grad() const { return node_->requires_grad; }

  Real* data() { return node_->value.data(); }
  const Real* data() const { return node_->value.data(); }
  std::vector<Real>& values() { return node_->value; }
  const std::vector<Real>& values() const { return node_->value; }
  Real at(int r, int c) const;
  Real item() const;  // scalar tensors only

  // Gradient after backward(); zero-sized until then.
  const std::vector<Real>& grad() const { return node_->grad; }
  std::vector<Real>& grad() { return node_->grad; }

  std::shared_ptr<Node>& node() { return node_; }
  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}
  friend Tensor make_op(int rows, int cols, std::vector<Tensor> parents,
                        std::function<void(Node&)> backward_fn);
  std::shared_ptr<Node> node_;
};

// Internal factory used by ops: output requires grad iff any parent does.
Tensor make_op(int rows, int cols, std::vector<Tensor> parents,
               std::function<void(Node&)> backward_fn);

// Reverse-mode sweep from a scalar loss. Accumulates into leaf grads
// (cleared only by the owner, e.g. ParamStore::zero_grad). Throws
// NumericError if the loss value is not finite.
void backward(const Tensor& loss);

// Zero-sizes grad on a leaf if present.
void clear_grad(Tensor& t);

}  // namespace adrl::nd
