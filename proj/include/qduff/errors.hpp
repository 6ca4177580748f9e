#pragma once

#include <stdexcept>
#include <string>

namespace qduff {

/// Raised when a state leaks too much weight into the top of the Fock basis.
class TruncationError : public std::runtime_error {
 public:
  TruncationError(const std::string& what, double tail_weight, double time = 0.0)
      : std::runtime_error(what), tail_weight_(tail_weight), time_(time) {}

  double tail_weight() const noexcept { return tail_weight_; }
  double time() const noexcept { return time_; }

 private:
  double tail_weight_;
  double time_;
};

/// Non-finite values, failed iterations, trace drift.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameter sets and malformed configuration files.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace qduff
