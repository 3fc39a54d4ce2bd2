#include "adrl/rl/value_norm.hpp"

#include <cmath>

namespace adrl::rl {

ValueNormalizer::ValueNormalizer(Real decay) : decay_(decay) {
  if (!(decay >= 0.0 && decay < 1.0)) {
    throw ContractViolation("ValueNormalizer: decay outside [0,1)");
  }
}

void ValueNormalizer::update(const std::vector<Real>& targets) {
  if (targets.empty()) throw ContractViolation("ValueNormalizer: empty batch");
  Real m = 0.0, sq = 0.0;
  for (Real t : targets) {
    if (!std::isfinite(t)) throw NumericError("ValueNormalizer: non-finite target");
    m += t;
    sq += t * t;
  }
  m /= static_cast<Real>(targets.size());
  sq /= static_cast<Real>(targets.size());
  if (initialized_) {
    ewma_mean_ = decay_ * ewma_mean_ + (1.0 - decay_) * m;
    ewma_sq_ = decay_ * ewma_sq_ + (1.0 - decay_) * sq;
  } else {
    ewma_mean_ = m;
    ewma_sq_ = sq;
    initialized_ = true;
  }
}

Real ValueNormalizer::stddev() const {
  if (!initialized_) return 1.0;
  const Real var = ewma_sq_ - ewma_mean_ * ewma_mean_;
  return std::sqrt(std::max(var, Real(1e-8)));
}

void ValueNormalizer::restore(Real ewma_mean, Real ewma_sq, bool initialized) {
  if (!std::isfinite(ewma_mean) || !std::isfinite(ewma_sq)) {
    throw NumericError("ValueNormalizer: non-finite restore state");
  }
  ewma_mean_ = ewma_mean;
  ewma_sq_ = ewma_sq;
  initialized_ = initialized;
}

}  // namespace adrl::rl
