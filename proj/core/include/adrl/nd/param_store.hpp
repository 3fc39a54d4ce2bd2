#pragma once

#include <string>
#include <vector>

#include "adrl/nd/tensor.hpp"

namespace adrl::nd {

// Named, ordered collection of trainable leaf tensors. Iteration order is
// insertion order and defines optimizer slot alignment and checkpoint layout.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Tensor tensor;
  };

  // Registers a new leaf (requires_grad controls whether it trains).
  Tensor add(const std::string& name, int rows, int cols,
             std::vector<Real> init, bool requires_grad = true);

  bool has(const std::string& name) const;
  Tensor get(const std::string& name) const;

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t param_count() const;

  void zero_grad();

  // Deep value copies, aligned with entries().
  std::vector<std::vector<Real>> snapshot() const;
  void load(const std::vector<std::vector<Real>>& values);

 private:
  std::vector<Entry> entries_;
};

}  // namespace adrl::nd
