#pragma once

#include <stdexcept>
#include <string>

namespace radgest {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument value (non-positive size, out-of-range index, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Tensor shape mismatch. The message names the offending axis.
class DimensionError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

// Operation invoked in the wrong state (e.g. backward on a consumed tape).
class StateError : public Error {
 public:
  using Error::Error;
};

// Inconsistent model / run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Filesystem failure. The message carries the path.
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents (bad magic, truncated payload, ...).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace radgest
