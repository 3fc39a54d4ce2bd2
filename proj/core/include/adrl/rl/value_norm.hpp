#pragma once

#include <vector>

#include "adrl/common.hpp"

namespace adrl::rl {

// Exponentially weighted moving mean/second-moment of value targets. The
// value head is trained against normalized targets; rollouts denormalize
// its output back to return space for advantage estimation. Before the
// first update the transform is the identity.
class ValueNormalizer {
 public:
  explicit ValueNormalizer(Real decay = 0.99);

  // Folds one batch of targets in (first batch sets the stats directly).
  void update(const std::vector<Real>& targets);

  Real normalize(Real v) const { return (v - mean()) / stddev(); }
  Real denormalize(Real v) const { return v * stddev() + mean(); }

  Real mean() const { return initialized_ ? ewma_mean_ : 0.0; }
  Real stddev() const;
  Real decay() const { return decay_; }
  bool initialized() const { return initialized_; }

  // For checkpoints.
  Real ewma_mean() const { return ewma_mean_; }
  Real ewma_sq() const { return ewma_sq_; }
  void restore(Real ewma_mean, Real ewma_sq, bool initialized);

 private:
  Real decay_;
  Real ewma_mean_ = 0.0;
  Real ewma_sq_ = 0.0;
  bool initialized_ = false;
};

}  // namespace adrl::rl
