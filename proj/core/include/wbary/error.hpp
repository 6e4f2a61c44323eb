#pragma once

#include <stdexcept>
#include <string>

namespace wbary {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments: shape mismatch, wrong dimension, malformed input.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A density left the domain of a penalty (below its floor).
class DomainViolation : public Error {
 public:
  using Error::Error;
};

/// An exact solver failed on an input that should have been feasible.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace wbary
