#pragma once

#include <stdexcept>
#include <string>

namespace hhnet {

// Bad or insufficient input: malformed files, unobserved dyads, invalid options.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The numerics failed: non-finite objectives, diverged fits, singular systems.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hhnet
