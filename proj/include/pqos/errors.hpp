#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pqos {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration value. `field()` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what);
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Precondition violated on otherwise well-formed input.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input. `line()` is 1-based; 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Column / feature layout does not match what was expected.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Non-finite or otherwise unusable numeric data. `row()` is 0-based.
class DataError : public Error {
 public:
  DataError(std::size_t row, const std::string& what);
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

}  // namespace pqos
