#pragma once

#include <stdexcept>
#include <string>

namespace yaware {

// Base class for all errors raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user input: malformed configs, manifests, files, or data that fails
// contract validation. The CLI maps these to exit code 1.
struct ValidationError : Error {
  using Error::Error;
};

// An operation was called with an out-of-range or inconsistent argument.
struct ParameterError : ValidationError {
  using ValidationError::ValidationError;
};

// A file on disk does not match its expected format.
struct FormatError : ValidationError {
  using ValidationError::ValidationError;
};

// A metric was asked to evaluate degenerate input (e.g. single-class AUC).
struct MetricError : ValidationError {
  using ValidationError::ValidationError;
};

// Runtime failures: the CLI maps these to exit code 2.
struct IoError : Error {
  using Error::Error;
};

struct ShapeError : Error {
  using Error::Error;
};

struct NumericError : Error {
  using Error::Error;
};

struct StateError : Error {
  using Error::Error;
};

}  // namespace yaware
