#pragma once

#include <stdexcept>

namespace slowheat {

// Exit-code contract for the CLI: validation problems map to exit 2,
// numerical failures (factorization, instability, refused fits) to exit 3.
struct validation_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace slowheat
