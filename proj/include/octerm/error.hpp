#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace octerm {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed model text. Line and column are 1-based.
class ParseError : public Error {
public:
  ParseError(std::size_t line, std::size_t column, const std::string& what);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

struct Diagnostic {
  std::string rule;     // short code of the violated invariant
  std::string message;  // human readable, names the offending state/rule
};

/// A model that parsed but violates one or more invariants.
class ValidationError : public Error {
public:
  explicit ValidationError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

private:
  std::vector<Diagnostic> diagnostics_;
};

/// An enumeration or table exceeded its configured size limit.
class CapExceeded : public Error {
public:
  using Error::Error;
};

/// The linear program has no solution with positive drift.
class NotRising : public Error {
public:
  using Error::Error;
};

/// A precondition on arguments was violated (bad epsilon, negative counter...).
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// An internal consistency check failed.
class InternalError : public Error {
public:
  using Error::Error;
};

}  // namespace octerm
