#pragma once

#include <stdexcept>
#include <string>

namespace persisters {

/// Raised when a configuration file or parameter set cannot be accepted.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when a computation fails numerically (blowup, non-convergence,
/// loss of positivity beyond tolerance).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace persisters
