#pragma once

#include <stdexcept>
#include <string>

namespace tvflow {

// Error families. The CLI maps each family to one exit code:
// config 2, ingestion 3, format 4, numerical 5.

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IngestionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
  FormatError(const std::string& msg, long long offset)
      : std::runtime_error(msg + " (byte offset " + std::to_string(offset) + ")"),
        byte_offset(offset) {}
  long long byte_offset;
};

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace tvflow
