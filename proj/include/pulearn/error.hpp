#pragma once

#include <stdexcept>
#include <string>

namespace pulearn {

// Precondition violated by caller-supplied data or configuration.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An oracle computation could not produce a trustworthy reference value.
class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed CSV or config text. Row/column are 1-based; 0 means "not applicable".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t row = 0, std::size_t column = 0)
      : std::runtime_error(what), row_(row), column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

}  // namespace pulearn
