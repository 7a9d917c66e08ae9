#pragma once

#include <stdexcept>
#include <string>

namespace gafzero {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed domain, out-of-range parameter, unknown config key.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class InvalidDomain : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Point outside the chart where a quantity is defined.
class DomainError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// A numerical procedure did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class NearBoundaryZero : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

class DegenerateSample : public Error {
 public:
  using Error::Error;
};

}  // namespace gafzero
