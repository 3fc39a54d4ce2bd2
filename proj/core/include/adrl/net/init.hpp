#pragma once

#include <vector>

#include "adrl/common.hpp"
#include "adrl/rng.hpp"

namespace adrl::net {

// N(0, 1/fan_in) weights for a dense layer mapping fan_in -> fan_out.
std::vector<Real> fan_in_init(Rng& rng, int fan_in, int fan_out);

// Gain-scaled orthogonal matrix (rows x cols): the thin Q factor of a
// Gaussian matrix via Gram-Schmidt, whose positive R diagonal makes the
// factor unique.
std::vector<Real> orthogonal_init(Rng& rng, int rows, int cols, Real gain);

}  // namespace adrl::net
