#pragma once

#include <stdexcept>
#include <string>

namespace hwfl {

// Invalid argument to a library operation (bad profile, shape mismatch,
// out-of-range k, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An experiment configuration that cannot be run as specified, e.g. weights
// that drive every hardware score non-positive.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hwfl
