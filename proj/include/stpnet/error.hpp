#pragma once

#include <stdexcept>
#include <string>

namespace stpnet {

/// Invalid user input: parameters, configuration, or preconditions.
/// The command-line tool maps this to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A parameter violates one of the model's structural inequalities.
class ConstraintViolation : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// A numerical procedure could not complete (step-size underflow, missing
/// equilibrium structure, I/O on results). Exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stpnet
