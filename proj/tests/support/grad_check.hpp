#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "adrl/nd/ops.hpp"
#include "adrl/nd/param_store.hpp"

namespace adrl::testing {

// Central-difference gradient verification. loss_fn must rebuild the graph
// from the store's current values on every call and be deterministic.
// Error metric per coordinate: |analytic - numeric| / max(1, |analytic|, |numeric|).
struct GradCheckReport {
  Real max_rel_err = 0;
  std::string worst_param;
  int worst_index = -1;
  std::size_t coords_checked = 0;
};

inline GradCheckReport check_gradients(
    nd::ParamStore& params, const std::function<nd::Tensor()>& loss_fn,
    Real h = 1e-5) {
  params.zero_grad();
  nd::Tensor loss = loss_fn();
  nd::backward(loss);

  std::vector<std::vector<Real>> analytic;
  analytic.reserve(params.size());
  for (const auto& e : params.entries()) {
    auto g = e.tensor.node()->grad;
    g.resize(e.tensor.numel(), 0.0);
    analytic.push_back(std::move(g));
  }

  GradCheckReport rep;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& e = params.entries()[i];
    if (!e.tensor.requires_grad()) continue;
    auto& value = e.tensor.node()->value;
    for (std::size_t j = 0; j < value.size(); ++j) {
      const Real saved = value[j];
      value[j] = saved + h;
      const Real fp = loss_fn().item();
      value[j] = saved - h;
      const Real fm = loss_fn().item();
      value[j] = saved;
      const Real numeric = (fp - fm) / (2 * h);
      const Real a = analytic[i][j];
      const Real err =
          std::abs(a - numeric) /
          std::max({static_cast<Real>(1.0), std::abs(a), std::abs(numeric)});
      ++rep.coords_checked;
      if (err > rep.max_rel_err) {
        rep.max_rel_err = err;
        rep.worst_param = e.name;
        rep.worst_index = static_cast<int>(j);
      }
    }
  }
  return rep;
}

}  // namespace adrl::testing
