#include "adrl/rl/gae.hpp"

#include <cmath>

namespace adrl::rl {

GaeResult compute_gae(const std::vector<Real>& rewards,
                      const std::vector<Real>& values,
                      const std::vector<std::uint8_t>& dones,
                      Real bootstrap_value, Real gamma, Real lambda) {
  const std::size_t T = rewards.size();
  if (values.size() != T || dones.size() != T) {
    throw ContractViolation("compute_gae: length mismatch");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0) || !(lambda >= 0.0 && lambda <= 1.0)) {
    throw ContractViolation("compute_gae: gamma/lambda outside [0,1]");
  }
  if (!std::isfinite(bootstrap_value)) {
    throw ContractViolation("compute_gae: non-finite bootstrap value");
  }
  for (std::size_t t = 0; t < T; ++t) {
    if (!std::isfinite(rewards[t]) || !std::isfinite(values[t])) {
      throw ContractViolation("compute_gae: non-finite input");
    }
  }

  GaeResult out;
  out.advantages.resize(T);
  out.targets.resize(T);
  Real next_adv = 0.0;
  Real next_value = bootstrap_value;
  for (std::size_t i = T; i-- > 0;) {
    const Real live = dones[i] ? 0.0 : 1.0;
    const Real delta = rewards[i] + gamma * next_value * live - values[i];
    const Real adv = delta + gamma * lambda * live * next_adv;
    out.advantages[i] = adv;
    out.targets[i] = adv + values[i];
    next_adv = adv;
    next_value = values[i];
  }
  return out;
}

}  // namespace adrl::rl
