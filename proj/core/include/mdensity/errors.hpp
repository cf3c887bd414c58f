#pragma once

#include <stdexcept>
#include <string>

namespace mdensity {

/// Shapes of two operands do not agree (e.g. len(x) != d).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A NaN or infinity showed up where a finite value is required.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A Markov chain or a training run produced non-finite values at `step`.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(long step, const std::string& what)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

/// A serialized net could not be parsed.
class NetFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mdensity
