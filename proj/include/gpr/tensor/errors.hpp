#pragma once

#include <stdexcept>
#include <string>

namespace gpr {

/// Operand shapes do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A softmax/attention mask left an axis with no participating entry.
class DegenerateMaskError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid hyperparameter or structural configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input data failed validation (malformed file, offsets, labels...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lookup of a missing key (sample id, parameter name).
class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Numerical failure during training (NaN/Inf loss).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gpr
