#include "adrl/nd/categorical.hpp"

#include <cmath>

namespace adrl::nd {

Categorical::Categorical(const Tensor& logits)
    : log_probs_(log_softmax(logits)) {}

std::vector<int> Categorical::sample(Rng& rng) const {
  std::vector<int> out(static_cast<std::size_t>(batch()));
  for (int r = 0; r < batch(); ++r) out[static_cast<std::size_t>(r)] = sample_row(r, rng);
  return out;
}

int Categorical::sample_row(int row, Rng& rng) const {
  const int A = actions();
  const Real* lp = log_probs_.data() + static_cast<std::size_t>(row) * A;
  Real u = rng.uniform();
  Real acc = 0;
  for (int a = 0; a < A; ++a) {
    acc += std::exp(lp[a]);
    if (u < acc) return a;
  }
  return A - 1;
}

Tensor Categorical::log_prob(const std::vector<int>& actions) const {
  return take_per_row(log_probs_, actions);
}

Tensor Categorical::entropy() const {
  return neg(sum_cols(mul(exp(log_probs_), log_probs_)));
}

Tensor Categorical::kl_to(const Categorical& other) const {
  if (other.batch() != batch() || other.actions() != actions()) {
    throw ContractViolation("Categorical::kl_to: shape mismatch");
  }
  return sum_cols(mul(probs(), sub(log_probs_, other.log_probs_)));
}

}  // namespace adrl::nd
