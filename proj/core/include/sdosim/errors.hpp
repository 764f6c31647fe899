#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sdosim {

/// Base class for runtime failures raised by the simulator. Precondition
/// violations use std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed directory file. `line()` is the 1-based line in the source.
class SchemaError : public Error {
 public:
  SchemaError(std::size_t line, const std::string& what)
      : Error("row " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// No relay satisfies the role and path constraints.
class ConstraintError : public Error {
 public:
  using Error::Error;
};

/// A closed-form metric whose denominator vanishes.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Phase 1 exhausted its attempt budget without collecting N working circuits.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace sdosim
