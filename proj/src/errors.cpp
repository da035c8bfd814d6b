#include "coinclab/errors.hpp"

namespace coinclab {

SchemaError::SchemaError(std::size_t line, std::string column, const std::string& what)
    : IoError("line " + std::to_string(line) + ", column '" + column + "': " + what),
      line_(line),
      column_(std::move(column)) {}

}  // namespace coinclab
