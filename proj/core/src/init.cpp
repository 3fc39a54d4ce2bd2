#include "adrl/net/init.hpp"

#include <cmath>

namespace adrl::net {

std::vector<Real> fan_in_init(Rng& rng, int fan_in, int fan_out) {
  if (fan_in < 1 || fan_out < 1) throw ContractViolation("fan_in_init: bad dims");
  std::vector<Real> w(static_cast<std::size_t>(fan_in) * fan_out);
  const Real s = 1.0 / std::sqrt(static_cast<Real>(fan_in));
  for (auto& x : w) x = rng.normal() * s;
  return w;
}

std::vector<Real> orthogonal_init(Rng& rng, int rows, int cols, Real gain) {
  if (rows < 1 || cols < 1) throw ContractViolation("orthogonal_init: bad dims");
  // Work with the tall orientation so columns can be orthonormalized, then
  // transpose back if needed.
  const bool flip = rows < cols;
  const int r = flip ? cols : rows;
  const int c = flip ? rows : cols;
  std::vector<Real> a(static_cast<std::size_t>(r) * c);
  for (auto& x : a) x = rng.normal();

  // Modified Gram-Schmidt on columns; sign fixed by the diagonal of R.
  for (int j = 0; j < c; ++j) {
    for (int k = 0; k < j; ++k) {
      Real dot = 0;
      for (int i = 0; i < r; ++i) {
        dot += a[static_cast<std::size_t>(i) * c + j] * a[static_cast<std::size_t>(i) * c + k];
      }
      for (int i = 0; i < r; ++i) {
        a[static_cast<std::size_t>(i) * c + j] -= dot * a[static_cast<std::size_t>(i) * c + k];
      }
    }
    Real norm = 0;
    for (int i = 0; i < r; ++i) {
      const Real x = a[static_cast<std::size_t>(i) * c + j];
      norm += x * x;
    }
    norm = std::sqrt(norm);
    if (!(norm > 0)) throw NumericError("orthogonal_init: rank-deficient draw");
    for (int i = 0; i < r; ++i) a[static_cast<std::size_t>(i) * c + j] /= norm;
  }

  std::vector<Real> w(static_cast<std::size_t>(rows) * cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const Real q = flip ? a[static_cast<std::size_t>(j) * c + i]
                          : a[static_cast<std::size_t>(i) * c + j];
      w[static_cast<std::size_t>(i) * cols + j] = gain * q;
    }
  }
  return w;
}

}  // namespace adrl::net
