#include "adrl/nd/tensor.hpp"

#include <cmath>
#include <unordered_set>

namespace adrl::nd {
namespace {

void check_shape(int rows, int cols, std::size_t n) {
  if (rows < 0 || cols < 0 ||
      static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) != n) {
    throw ContractViolation("Tensor: shape does not match value count");
  }
}

}  // namespace

Tensor Tensor::leaf(int rows, int cols, std::vector<Real> value,
                    bool requires_grad) {
  check_shape(rows, cols, value.size());
  auto n = std::make_shared<Node>();
  n->rows = rows;
  n->cols = cols;
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  n->is_leaf = true;
  return Tensor(std::move(n));
}

Tensor Tensor::constant(int rows, int cols, std::vector<Real> value) {
  return leaf(rows, cols, std::move(value), false);
}

Tensor Tensor::zeros(int rows, int cols, bool requires_grad) {
  return leaf(rows, cols,
              std::vector<Real>(static_cast<std::size_t>(rows) * cols, 0.0),
              requires_grad);
}

Tensor Tensor::full(int rows, int cols, Real v) {
  return constant(rows, cols,
                  std::vector<Real>(static_cast<std::size_t>(rows) * cols, v));
}

Tensor Tensor::scalar(Real v) { return constant(1, 1, {v}); }

Real Tensor::at(int r, int c) const {
  if (r < 0 || r >= rows() || c < 0 || c >= cols()) {
    throw ContractViolation("Tensor::at: index out of range");
  }
  return node_->value[static_cast<std::size_t>(r) * cols() + c];
}

Real Tensor::item() const {
  if (numel() != 1) throw ContractViolation("Tensor::item: not a scalar");
  return node_->value[0];
}

Tensor make_op(int rows, int cols, std::vector<Tensor> parents,
               std::function<void(Node&)> backward_fn) {
  auto n = std::make_shared<Node>();
  n->rows = rows;
  n->cols = cols;
  n->value.resize(static_cast<std::size_t>(rows) * cols);
  for (auto& p : parents) {
    if (!p.defined()) throw ContractViolation("op on undefined tensor");
    n->requires_grad = n->requires_grad || p.requires_grad();
    n->parents.push_back(p.node());
  }
  if (n->requires_grad) n->backward_fn = std::move(backward_fn);
  return Tensor(std::move(n));
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw ContractViolation("backward: loss must be a defined scalar");
  }
  if (!std::isfinite(loss.item())) {
    throw NumericError("backward: loss is not finite");
  }
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS over grad-requiring ancestors.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  struct Frame {
    Node* n;
    std::size_t next_parent;
  };
  std::vector<Frame> stack;
  stack.push_back({loss.node().get(), 0});
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_parent < f.n->parents.size()) {
      Node* p = f.n->parents[f.next_parent++].get();
      if (p->requires_grad && seen.insert(p).second) {
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(f.n);
      stack.pop_back();
    }
  }

  // Fresh zero grads for interior nodes; leaves keep accumulating.
  for (Node* n : order) {
    if (!n->is_leaf) {
      n->grad.assign(n->numel(), 0.0);
    } else if (n->grad.size() != n->numel()) {
      n->grad.assign(n->numel(), 0.0);
    }
  }
  loss.node()->grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn) n->backward_fn(*n);
  }
}

void clear_grad(Tensor& t) {
  if (t.defined()) t.node()->grad.clear();
}

}  // namespace adrl::nd
