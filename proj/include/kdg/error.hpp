#pragma once

#include <stdexcept>
#include <string>

namespace kdg {

/// Raised when an input violates a documented precondition or admissible range.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure cannot produce a meaningful value
/// (singular evaluation, unresolved grid, empty sample set).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace kdg
