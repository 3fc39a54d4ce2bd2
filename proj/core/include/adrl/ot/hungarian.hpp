#pragma once

#include <vector>

#include "adrl/common.hpp"

namespace adrl::ot {

// Exact min-cost matching of all min(m,n) pairs (rectangular Hungarian
// algorithm with potentials). Returns the matched column per row, -1 for
// unmatched rows when m > n.
std::vector<int> hungarian_match(const std::vector<Real>& cost, int m, int n);

}  // namespace adrl::ot
