#pragma once

#include <stdexcept>
#include <string>

namespace preslab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// config / input problems (CLI exit code 1)
struct ConfigError : Error {
  using Error::Error;
};
struct IdentityWord : ConfigError {
  using ConfigError::ConfigError;
};
struct UnsupportedGroup : ConfigError {
  using ConfigError::ConfigError;
};
struct OutOfDomain : ConfigError {
  using ConfigError::ConfigError;
};

// resource / data-volume problems (CLI exit code 2)
struct ResourceError : Error {
  using Error::Error;
};
struct ResourceLimit : ResourceError {
  using ResourceError::ResourceError;
};
struct InsufficientData : ResourceError {
  using ResourceError::ResourceError;
};

// numerical failures (CLI exit code 3)
struct NumericError : Error {
  using Error::Error;
};
struct SingularProduct : NumericError {
  using NumericError::NumericError;
};
struct ProximalityFailure : NumericError {
  using NumericError::NumericError;
};
struct DegeneratePairing : NumericError {
  using NumericError::NumericError;
};
struct DegenerateQuad : NumericError {
  using NumericError::NumericError;
};
struct NotLoxodromic : NumericError {
  using NumericError::NumericError;
};
struct PositivityViolation : NumericError {
  using NumericError::NumericError;
};
struct NonConvergence : NumericError {
  using NumericError::NumericError;
};
struct BracketFailure : NumericError {
  using NumericError::NumericError;
};
struct CertificationFailure : NumericError {
  using NumericError::NumericError;
};
struct StepTooLarge : NumericError {
  using NumericError::NumericError;
};

}  // namespace preslab
