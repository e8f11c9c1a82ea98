#ifndef SMNAE_ERRORS_HPP
#define SMNAE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace smnae {

// Bad inputs: mismatched dimensions, malformed files, invalid configuration.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical failures: NaN/Inf appearing mid-computation, divergent training.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace smnae

#endif
