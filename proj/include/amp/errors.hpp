#pragma once

#include <stdexcept>

namespace amp {

// Error taxonomy shared across the library. The CLI maps usage/validation
// problems to exit code 2 and numerical failures to exit code 3.
struct domain_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct validation_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace amp
