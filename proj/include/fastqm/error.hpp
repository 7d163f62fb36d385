#pragma once

#include <stdexcept>
#include <string>

namespace fastqm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments: bad dimensions, out-of-range counts, inconsistent shapes.
class InputError : public Error {
 public:
  using Error::Error;
};

/// File-system or format problems.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown (singular systems, non-finite values, failed SVD).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace fastqm
