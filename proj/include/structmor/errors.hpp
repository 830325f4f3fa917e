#pragma once

#include <stdexcept>
#include <string>

namespace structmor {

/// Inconsistent matrix dimensions or malformed input data.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an operation does not hold
/// (instability, non-minimality, non-passivity, singular coupling, ...).
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solver could not meet its accuracy contract.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File or serialization failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Storage/supply LMI has no solution; carries the best residual reached.
class InfeasibleError : public PreconditionError {
 public:
  InfeasibleError(const std::string& what, double best_residual)
      : PreconditionError(what), best_residual_(best_residual) {}
  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

}  // namespace structmor
