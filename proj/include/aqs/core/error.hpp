#pragma once

#include <stdexcept>
#include <string>

namespace aqs {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data: unreadable files, invariant violations in user-supplied
// tables, missing variables. The CLI maps these to exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

// Bad invocation: unknown model kind, malformed flag values. Exit code 1.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Invalid request naming the offending field.
class FieldError : public UsageError {
 public:
  FieldError(std::string field, const std::string& message) : UsageError(message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Lookup of an unknown scenario, file or catalog entry.
class NotFound : public Error {
 public:
  using Error::Error;
};

// An iterative solver hit its iteration cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace aqs
