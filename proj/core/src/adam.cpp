#include "adrl/nd/adam.hpp"

#include <cmath>

namespace adrl::nd {

Adam::Adam(const ParamStore& params, AdamConfig cfg) : cfg_(cfg) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const auto& e : params.entries()) {
    m_.emplace_back(e.tensor.numel(), 0.0);
    v_.emplace_back(e.tensor.numel(), 0.0);
  }
}

Adam::StepStats Adam::step(ParamStore& params, Real max_grad_norm) {
  if (params.size() != m_.size()) {
    throw ContractViolation("Adam::step: store no longer matches optimizer");
  }

  Real sq = 0;
  for (const auto& e : params.entries()) {
    if (!e.tensor.requires_grad()) continue;
    const auto& g = e.tensor.node()->grad;
    // Parameters untouched by the last backward pass count as zero grad.
    for (Real x : g) {
      if (!std::isfinite(x)) {
        throw NumericError("Adam::step: non-finite gradient in " + e.name);
      }
      sq += x * x;
    }
  }
  StepStats stats;
  stats.grad_norm = std::sqrt(sq);
  if (max_grad_norm > 0 && stats.grad_norm > max_grad_norm) {
    stats.clip_scale = max_grad_norm / stats.grad_norm;
  }

  ++step_count_;
  const Real bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<Real>(step_count_));
  const Real bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<Real>(step_count_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& e = params.entries()[i];
    if (!e.tensor.requires_grad()) continue;
    const auto& g = e.tensor.node()->grad;
    auto& value = e.tensor.node()->value;
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < value.size(); ++j) {
      const Real gj = (j < g.size() ? g[j] : 0.0) * stats.clip_scale;
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * gj;
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * gj * gj;
      const Real mhat = m[j] / bc1;
      const Real vhat = v[j] / bc2;
      value[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
  return stats;
}

void Adam::restore(std::vector<std::vector<Real>> m,
                   std::vector<std::vector<Real>> v, std::int64_t step_count) {
  if (m.size() != m_.size() || v.size() != v_.size()) {
    throw ContractViolation("Adam::restore: slot count mismatch");
  }
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i].size() != m_[i].size() || v[i].size() != v_[i].size()) {
      throw ContractViolation("Adam::restore: slot size mismatch");
    }
  }
  m_ = std::move(m);
  v_ = std::move(v);
  step_count_ = step_count;
}

}  // namespace adrl::nd
