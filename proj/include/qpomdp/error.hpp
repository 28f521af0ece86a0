#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qpomdp {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed POMDP or strategy text. Carries a 1-based source position.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : Error("line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// A well-formed document that describes an invalid model.
class ModelError : public Error {
 public:
  using Error::Error;
};

// Misuse of the clause database (empty clause, tautology, unknown variable).
class CnfError : public Error {
 public:
  using Error::Error;
};

// External solver failed, or returned something we refuse to trust.
class SolverError : public Error {
 public:
  using Error::Error;
};

// An exponential procedure hit its configured cap.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace qpomdp
