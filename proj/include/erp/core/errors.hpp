#pragma once

#include <stdexcept>
#include <string>

namespace erp {

/// Invalid inputs: bad parameters, shape mismatches, malformed files.
/// The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Numerical failure at run time (non-finite loss, filter underflow,
/// series truncation failure, no root in the search interval).
/// The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace erp
