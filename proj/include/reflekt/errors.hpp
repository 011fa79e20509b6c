#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace reflekt {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller violated a documented precondition (dimension mismatch, bad parameter).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class NormalizationError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class UnsupportedGroupError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class NotInChamberError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class DimensionCapError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Numerical failures: caps exceeded, tolerance breakdown, non-convergence.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class GroupTooLargeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class StabilizerMismatchError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IterationCapError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class OracleViolationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DykstraNonconvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Witness that one side of an iff-characterization disagreed with the other.
struct Counterexample {
  std::string check;
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  bool lhs = false;
  bool rhs = false;
  std::string detail;
};

class CharacterizationFailure : public Error {
 public:
  explicit CharacterizationFailure(Counterexample c)
      : Error(c.check + ": lhs=" + (c.lhs ? "true" : "false") +
              " rhs=" + (c.rhs ? "true" : "false") +
              (c.detail.empty() ? "" : " (" + c.detail + ")")),
        counterexample_(std::move(c)) {}

  const Counterexample& counterexample() const noexcept { return counterexample_; }

 private:
  Counterexample counterexample_;
};

}  // namespace reflekt
