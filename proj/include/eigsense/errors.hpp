#pragma once

#include <stdexcept>
#include <string>

namespace eigsense {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes or lengths that do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Sample count too small for the random-matrix regime (needs ML < Ns).
class RegimeError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Input that carries no information (zero power, all-zero filter, ...).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or an iteration that failed to converge.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition on a matrix argument was violated.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class SingularCovarianceError : public Error {
 public:
  using Error::Error;
};

/// Painleve II integration failed while building the Tracy-Widom table.
class GenerationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace eigsense
