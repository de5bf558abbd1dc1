#pragma once

#include <stdexcept>
#include <string>

namespace kfjlt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A coordinate or flat position lies outside its axis bounds.
class InvalidIndexError : public Error {
 public:
  using Error::Error;
};

/// Two partial indices were combined on overlapping axes.
class AxisConflictError : public Error {
 public:
  using Error::Error;
};

/// A requested axis subset is not contained in the available axes.
class InvalidSubsetError : public Error {
 public:
  using Error::Error;
};

/// An array does not have the expected shape.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A vector length does not match the operator, or a length is not a power of two.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument (also used for operator construction failures).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// An exhaustive enumeration would exceed its combinatorial budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// A closed form was evaluated outside its domain of validity.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment configuration. `field()` names the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace kfjlt
