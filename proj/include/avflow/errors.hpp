#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace avflow {

// Argument outside the open interval a constitutive function is defined on.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A solver state left its admissible set (e.g. Omega_n for the particle
// system). Carries the offending index so diagnostics can point at it.
class StateSpaceError : public DomainError {
 public:
  StateSpaceError(const std::string& what, std::size_t index)
      : DomainError(what + " (index " + std::to_string(index) + ")"),
        index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

// Unrecoverable solver failure: step-size underflow, instability detector,
// non-finite values.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration: bad parameter values or unknown keys.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace avflow
