#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace coinclab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation
/// (e.g. a non-positive wavelength denominator).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Filesystem or stream failure.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Carries the 1-based line and the column name.
class SchemaError : public IoError {
 public:
  SchemaError(std::size_t line, std::string column, const std::string& what);

  std::size_t line() const noexcept { return line_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::string column_;
};

/// Least-squares fit that did not converge. Keeps the best parameters seen.
class FitError : public Error {
 public:
  FitError(const std::string& what, std::vector<double> best_params)
      : Error(what), best_params_(std::move(best_params)) {}

  const std::vector<double>& best_params() const noexcept { return best_params_; }

 private:
  std::vector<double> best_params_;
};

}  // namespace coinclab
