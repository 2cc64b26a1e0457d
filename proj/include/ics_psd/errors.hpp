#pragma once

#include <stdexcept>
#include <string>

namespace ics_psd {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs with inconsistent or empty dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition does not hold (e.g. a non-symmetric matrix).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure inside a dense decomposition.
class DecompositionError : public Error {
 public:
  using Error::Error;
};

class NotPsdError : public Error {
 public:
  using Error::Error;
};

class SampleSizeError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be invertible is (numerically) singular.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Every candidate subset of a subset-based robust estimator is singular.
class HyperplaneError : public SingularityError {
 public:
  using SingularityError::SingularityError;
};

/// The requested estimator does not support an operation (e.g. no crossproduct root).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration (bad spec string, unknown method, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Failure reading or writing files, including malformed CSV input.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ics_psd
