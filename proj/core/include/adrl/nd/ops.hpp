#pragma once

#include <vector>

#include "adrl/nd/tensor.hpp"

namespace adrl::nd {

// All ops validate shapes and throw ContractViolation on mismatch.

Tensor matmul(const Tensor& a, const Tensor& b);  // [m,k]x[k,n] -> [m,n]

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
Tensor neg(const Tensor& a);
Tensor scale(const Tensor& a, Real c);
Tensor add_scalar(const Tensor& a, Real c);

// Broadcasts v ([1,D]) across the rows of x ([B,D]).
Tensor add_rowvec(const Tensor& x, const Tensor& v);
// Broadcasts m ([B,1]) across the columns of x ([B,D]).
Tensor mul_colvec(const Tensor& x, const Tensor& m);

Tensor relu(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);  // domain errors raise NumericError
Tensor square(const Tensor& a);
Tensor softplus(const Tensor& a);  // log(1+e^x), overflow-safe

Tensor sum(const Tensor& a);   // -> [1,1]
Tensor mean(const Tensor& a);  // -> [1,1]
Tensor sum_cols(const Tensor& a);  // [B,D] -> [B,1]

Tensor min_elem(const Tensor& a, const Tensor& b);
// Clamps to [lo,hi]; gradient passes where lo <= x <= hi.
Tensor clamp(const Tensor& a, Real lo, Real hi);

// Per-row normalization y = g*(x-mu)/sqrt(var+eps) + b over the feature
// axis; g and b are [1,D].
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  Real eps = 1e-5);

// Numerically stable per-row log-softmax. Rejects non-finite logits.
Tensor log_softmax(const Tensor& x);

// y_i = x_i / sqrt(|x_i|^2 + eps) per row.
Tensor l2_normalize_rows(const Tensor& x, Real eps = 1e-8);

Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor gather_rows(const Tensor& x, std::vector<int> idx);
// out[i,0] = x[i, idx[i]]
Tensor take_per_row(const Tensor& x, std::vector<int> idx);

// Cuts the graph: same values, no gradient.
Tensor detach(const Tensor& a);

// sum(a*b) per row -> [B,1]. Convenience composition.
Tensor dot_rows(const Tensor& a, const Tensor& b);

bool all_finite(const Tensor& a);

}  // namespace adrl::nd
