#pragma once

#include <stdexcept>
#include <string>

namespace gpe_optctl {

/// Invalid or inconsistent configuration; raised before any computation starts.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure of a numerical procedure (norm drift, non-convergence, non-finite values).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The node update of a sequential sweep and the step it drives did not settle on a common
/// value, typically because the update strength is too large.
class SequentialUpdateError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A control value outside the admissible range of its potential family.
class ControlOutOfBounds : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Two objects that must live on the same grid do not.
class GridMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace gpe_optctl
