#pragma once

#include <stdexcept>
#include <string>

namespace sstgnn {

// Operand shapes do not conform.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Caller-supplied value outside the documented domain.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Malformed or truncated file.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values or a solver that failed to converge.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inconsistent configuration or corpus.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Train and test seed ranges overlap.
struct SplitError : ConfigError {
  using ConfigError::ConfigError;
};

// A metric is undefined for the given labels (e.g. AUC with one class).
struct MetricError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace sstgnn
