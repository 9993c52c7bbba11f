#pragma once

#include <stdexcept>
#include <string>

namespace mtrvm {

// Invalid user-supplied configuration or arguments (CLI exit code 1).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure at run time: divergence, non-SPD systems, degenerate
// posteriors (CLI exit code 2).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mtrvm
