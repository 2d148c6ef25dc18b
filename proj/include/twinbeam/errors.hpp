#pragma once

#include <stdexcept>
#include <string>

namespace twinbeam {

// Raised when a computation cannot be completed numerically (as opposed to
// std::invalid_argument, which signals bad input).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested derivative order exceeds the configured limit.
class OrderLimitError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Photon-number truncation could not push the tail mass below tolerance.
class TruncationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace twinbeam
