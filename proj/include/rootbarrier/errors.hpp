#pragma once

#include <stdexcept>
#include <string>

namespace rootbarrier {

// Bad user input: malformed config, measure outside the admissible class,
// unreadable table file. CLI exit code 2.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A numerical procedure failed (no root bracket, step cap, quadrature).
// CLI exit code 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A runtime invariant check tripped (containment, monotonicity). CLI exit
// code 4.
struct InvariantViolation : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace rootbarrier
