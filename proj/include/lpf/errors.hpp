#pragma once

#include <stdexcept>
#include <string>

namespace lpf {

// Base error carrying a short machine-readable category used by the CLI
// for exit reporting.
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& what)
      : std::runtime_error(what), category_(std::move(category)) {}
  const std::string& category() const { return category_; }

 private:
  std::string category_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config_parse", what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io", what) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error("invalid_argument", what) {}
};

// Nonfinite values produced by the time stepper; carries the step index at
// which the blowup was detected.
class SolverBlowup : public Error {
 public:
  SolverBlowup(long step, const std::string& what)
      : Error("numeric_blowup", what + " (step " + std::to_string(step) + ")"),
        step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

// All log-weights are -inf: the ensemble carries no usable information.
class DegenerateWeights : public Error {
 public:
  explicit DegenerateWeights(const std::string& what) : Error("degenerate_weights", what) {}
};

// Tempering exceeded its iteration budget.
class TemperLimit : public Error {
 public:
  explicit TemperLimit(const std::string& what) : Error("temper_limit", what) {}
};

}  // namespace lpf
