#pragma once

#include <stdexcept>
#include <string>

namespace heatbath {

/// Malformed or semantically invalid scenario. `line` is 0 when not tied to a source line.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// A horizon beyond half the bath recurrence time, or an unstable reference step.
class GuardViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Integrator abort: energy drift above the configured bound or a non-finite state.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace heatbath
