#pragma once

#include <stdexcept>
#include <string>

namespace rfdae {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// An operation was invoked out of order, e.g. backward without a cached forward.
class StateError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf produced or detected, or a gradient check failed to evaluate.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Invalid argument or configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class FormatErrorKind {
  kIo,
  kBadMagic,
  kVersionMismatch,
  kTruncated,
  kShapeMismatch,
  kChecksumMismatch,
  kInvalidValue,
};

const char* to_string(FormatErrorKind kind);

// Malformed or unreadable dataset/checkpoint file.
class FormatError : public Error {
 public:
  FormatError(FormatErrorKind kind, const std::string& what)
      : Error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  FormatErrorKind kind() const { return kind_; }

 private:
  FormatErrorKind kind_;
};

}  // namespace rfdae
