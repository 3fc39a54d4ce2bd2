#pragma once

#include <cstdint>
#include <vector>

#include "adrl/nd/param_store.hpp"

namespace adrl::nd {

struct AdamConfig {
  Real lr = 3e-4;
  Real beta1 = 0.9;
  Real beta2 = 0.999;
  Real eps = 1e-8;
};

// Adam with optional joint global-norm gradient clipping applied before the
// moment updates. Slot order is bound to the store's entry order.
class Adam {
 public:
  Adam(const ParamStore& params, AdamConfig cfg);

  struct StepStats {
    Real grad_norm = 0;   // pre-clip global norm
    Real clip_scale = 1;  // factor applied to all gradients
  };

  // One update over all trainable entries. max_grad_norm <= 0 disables
  // clipping. Throws NumericError on non-finite gradients (no partial
  // update is applied). A step with all-zero gradients leaves parameter
  // values unchanged but still advances the step count.
  StepStats step(ParamStore& params, Real max_grad_norm = 0);

  std::int64_t step_count() const { return step_count_; }
  const AdamConfig& config() const { return cfg_; }

  // Moment buffers, aligned with the store (for checkpoints).
  const std::vector<std::vector<Real>>& m() const { return m_; }
  const std::vector<std::vector<Real>>& v() const { return v_; }
  void restore(std::vector<std::vector<Real>> m, std::vector<std::vector<Real>> v,
               std::int64_t step_count);

 private:
  AdamConfig cfg_;
  std::vector<std::vector<Real>> m_;
  std::vector<std::vector<Real>> v_;
  std::int64_t step_count_ = 0;
};

}  // namespace adrl::nd
