#pragma once

#include <stdexcept>
#include <string>

namespace adrl {

using Real = double;

// Violated preconditions and API misuse. Programming errors, not data errors.
struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

// Non-finite values, failed convergence, malformed external data.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace adrl
