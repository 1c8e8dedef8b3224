#pragma once

#include <stdexcept>
#include <string>

namespace semimnar {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration, unknown identifiers, bad CLI input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Dataset violates a structural invariant at the point of use.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Base for failures of the numerical machinery (solver, smoother, variance).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A cell smoother was evaluated at a code with no mass.
class EmptyCell : public NumericalError {
 public:
  explicit EmptyCell(std::string where)
      : NumericalError("empty cell at " + where), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

/// Kernel denominator fell below the evaluation floor.
class DegenerateWindow : public NumericalError {
 public:
  explicit DegenerateWindow(std::string where)
      : NumericalError("degenerate kernel window at " + where), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

class BandwidthSelectionFailed : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularDesign : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The residual has the same sign at both ends of the bracket.
class NoSignChange : public NumericalError {
 public:
  NoSignChange(double lo, double hi, double f_lo, double f_hi);
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }

 private:
  double lo_, hi_;
};

class NearSingularJacobian : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class MaxIterations : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Generic solver failure (e.g. the bracket collapsed onto a discontinuity).
class SolverFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace semimnar
