#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace beamshift {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied value violates a documented invariant. The message names the field.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& field, const std::string& what)
      : Error(field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// The post-selected beam carries (numerically) no power: 1 + γ sin2β cosφ ≤ ε.
class DegenerateProjection : public Error {
 public:
  using Error::Error;
};

/// Platform rotation outside the range where the linear displacement law is trusted.
class OutOfLinearRange : public Error {
 public:
  using Error::Error;
};

/// Frame total below the configured floor; usually means too much ND attenuation.
class EmptyFrame : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// The data carry no information about the parameter being fitted.
class NonIdentifiable : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; line() is 1-based.
class SchemaError : public Error {
 public:
  SchemaError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace beamshift
