#pragma once

#include <stdexcept>
#include <string>

namespace kanai_cavity {

// Two families: bad input (caller can fix the configuration) and numerical
// failure (the requested computation cannot be carried out accurately).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain on which a quantity is defined.
class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidElement : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidGeometry : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidSchedule : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A precondition on a matrix or state was violated (e.g. a non-canonical
/// round-trip matrix handed to the stability analysis).
class ContractViolation : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Closed forms exist only for the underdamped constant-friction case.
class UnsupportedRegime : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NearCausticError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NearFocalPlaneError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NearInstabilityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularJacobianError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class BeamParameterSingularity : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ResolutionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Grid cannot represent the field. Carries a suggested sample count.
class SamplingError : public NumericalError {
 public:
  SamplingError(const std::string& what, std::size_t suggested_n)
      : NumericalError(what), suggested_n_(suggested_n) {}

  std::size_t suggested_n() const noexcept { return suggested_n_; }

 private:
  std::size_t suggested_n_;
};

}  // namespace kanai_cavity
