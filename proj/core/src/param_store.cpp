#include "adrl/nd/param_store.hpp"

namespace adrl::nd {

Tensor ParamStore::add(const std::string& name, int rows, int cols,
                       std::vector<Real> init, bool requires_grad) {
  if (has(name)) throw ContractViolation("ParamStore: duplicate name " + name);
  Tensor t = Tensor::leaf(rows, cols, std::move(init), requires_grad);
  entries_.push_back({name, t});
  return t;
}

bool ParamStore::has(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return true;
  }
  return false;
}

Tensor ParamStore::get(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e.tensor;
  }
  throw ContractViolation("ParamStore: unknown name " + name);
}

std::size_t ParamStore::param_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.tensor.numel();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& e : entries_) {
    e.tensor.node()->grad.assign(e.tensor.numel(), 0.0);
  }
}

std::vector<std::vector<Real>> ParamStore::snapshot() const {
  std::vector<std::vector<Real>> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.tensor.values());
  return out;
}

void ParamStore::load(const std::vector<std::vector<Real>>& values) {
  if (values.size() != entries_.size()) {
    throw ContractViolation("ParamStore::load: entry count mismatch");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].size() != entries_[i].tensor.numel()) {
      throw ContractViolation("ParamStore::load: size mismatch at " +
                              entries_[i].name);
    }
    entries_[i].tensor.values() = values[i];
  }
}

}  // namespace adrl::nd
