#pragma once

#include <stdexcept>
#include <string>

namespace relight {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (non-unit direction,
/// shininess below one, empty mask, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Image, mask or matrix dimensions disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values were encountered.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Singular values needed for a derivative coincide.
class DegenerateSpectrumError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// File could not be read, written or parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace relight
