#pragma once

#include <stdexcept>
#include <string>

namespace qzeno {

// Base class for every failure raised by the simulator. Callers that only care
// whether a run succeeded can catch this one type.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A state vector whose norm underflowed; the trajectory is numerically dead.
class ZeroNormError : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

// A jump probability above one: the time step is too large for the decay rate.
class ProbabilityOverflowError : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

class DomainError : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

class DivisionByZeroError : public DomainError {
 public:
  using DomainError::DomainError;
};

class QuadratureFailure : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

// Density-matrix integration drifted out of its Hermiticity or trace tolerance.
class ToleranceExceeded : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

class FitError : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

class NonPositiveValues : public FitError {
 public:
  using FitError::FitError;
};

// Bad user configuration. `key` names the offending entry and `line` is the
// 1-based line in the config file, or 0 when the value came from elsewhere.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, std::string key = {}, int line = 0)
      : std::runtime_error(message), key_(std::move(key)), line_(line) {}

  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  std::string key_;
  int line_;
};

}  // namespace qzeno
