#pragma once

#include <vector>

#include "adrl/nd/ops.hpp"
#include "adrl/rng.hpp"

namespace adrl::nd {

// Batched categorical distribution over action logits [B,A]. All returned
// tensors stay on the graph, so losses differentiate through the logits.
class Categorical {
 public:
  explicit Categorical(const Tensor& logits);

  int batch() const { return log_probs_.rows(); }
  int actions() const { return log_probs_.cols(); }

  const Tensor& log_probs() const { return log_probs_; }
  Tensor probs() const { return exp(log_probs_); }

  std::vector<int> sample(Rng& rng) const;
  int sample_row(int row, Rng& rng) const;

  Tensor log_prob(const std::vector<int>& actions) const;  // [B,1]
  Tensor entropy() const;                                  // [B,1]
  // KL(this || other), rowwise -> [B,1].
  Tensor kl_to(const Categorical& other) const;

 private:
  Tensor log_probs_;
};

}  // namespace adrl::nd
