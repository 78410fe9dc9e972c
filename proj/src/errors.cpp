#include "pqos/errors.hpp"

#include <utility>

namespace pqos {

ConfigError::ConfigError(std::string field, const std::string& what)
    : Error("invalid configuration '" + field + "': " + what), field_(std::move(field)) {}

ParseError::ParseError(std::size_t line, const std::string& what)
    : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

DataError::DataError(std::size_t row, const std::string& what)
    : Error("row " + std::to_string(row) + ": " + what), row_(row) {}

}  // namespace pqos
