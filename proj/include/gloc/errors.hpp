#pragma once

#include <stdexcept>
#include <string>

namespace gloc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Problems with the inputs. The CLI maps these to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A parameter combination that is individually valid but jointly infeasible,
// e.g. a periodic message whose airtime exceeds the reporting interval.
class ConstraintViolation : public ConfigError {
 public:
  explicit ConstraintViolation(const std::string& what)
      : ConfigError("ConstraintViolation: " + what) {}
};

class DomainError : public ConfigError {
 public:
  explicit DomainError(const std::string& what) : ConfigError("DomainError: " + what) {}
};

class DensityInfeasible : public ConfigError {
 public:
  explicit DensityInfeasible(const std::string& what)
      : ConfigError("DensityInfeasible: " + what) {}
};

// Numerical failures. The CLI maps these to exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class PrecisionLoss : public NumericalError {
 public:
  explicit PrecisionLoss(const std::string& what) : NumericalError("PrecisionLoss: " + what) {}
};

class QuadratureNotConverged : public NumericalError {
 public:
  explicit QuadratureNotConverged(const std::string& what)
      : NumericalError("QuadratureNotConverged: " + what) {}
};

class RejectionOverflow : public NumericalError {
 public:
  explicit RejectionOverflow(const std::string& what)
      : NumericalError("RejectionOverflow: " + what) {}
};

}  // namespace gloc
