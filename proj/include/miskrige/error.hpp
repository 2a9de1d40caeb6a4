#pragma once

#include <stdexcept>
#include <string>

namespace miskrige {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: bad parameters, violated preconditions, malformed files.
/// The CLI maps this to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A computation broke down numerically. The CLI maps this to exit code 2.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// K + lambda*I is not numerically positive definite.
class FactorizationFailed : public NumericalError {
 public:
  FactorizationFailed(const std::string& what, double suggested_nugget)
      : NumericalError(what), suggested_nugget_(suggested_nugget) {}

  /// Heuristic nugget that would make the factorization succeed.
  double suggested_nugget() const { return suggested_nugget_; }

 private:
  double suggested_nugget_;
};

/// Predictive variance came out significantly negative.
class NumericalBreakdown : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace miskrige
