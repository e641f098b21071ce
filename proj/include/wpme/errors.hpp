#pragma once

#include <stdexcept>
#include <string>

namespace wpme {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameters outside the mathematical domain of an operation (m <= 1, q <= 2, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A theorem's scope is not met (for instance p <= m for the q = 2 families).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Barrier parameters used without a passing feasibility certificate.
class InfeasibleParams : public Error {
 public:
  using Error::Error;
};

/// Evaluation time outside the lifetime of a blow-up barrier.
class TimeAtOrBeyondHorizon : public Error {
 public:
  using Error::Error;
};

/// Residual requested on the free boundary, where the derivative fields are singular.
class OnCutoffSurface : public Error {
 public:
  using Error::Error;
};

/// Nested-ball solutions were not monotone in the radius.
class MonotonicityViolation : public Error {
 public:
  using Error::Error;
};

/// The explicit step fell below SolverConfig::dt_min.
class StepCollapse : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace wpme
