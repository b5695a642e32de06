#pragma once

#include <stdexcept>
#include <string>

namespace resilest {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input (dimensions, index ranges, file contents).
/// The CLI maps this to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A mathematical precondition does not hold (correctability, redundancy,
/// Schur stability, ...). The CLI maps this to exit code 3.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Input that is valid but outside what a particular routine supports.
class UnsupportedInput : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

}  // namespace resilest
