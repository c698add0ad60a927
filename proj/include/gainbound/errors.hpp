#pragma once

#include <stdexcept>
#include <string>

namespace gainbound {

/// Invalid or inconsistent user input: bad dimensions, non-SPD mass matrix,
/// malformed config files. Maps to CLI exit code 1.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Closed loop failed the Schur-stability margin. Carries the offending
/// spectral radius. Maps to CLI exit code 2.
class UnstableLoopError : public std::runtime_error {
 public:
  UnstableLoopError(double spectral_radius, const std::string& what)
      : std::runtime_error(what), spectral_radius_(spectral_radius) {}

  double spectral_radius() const noexcept { return spectral_radius_; }

 private:
  double spectral_radius_;
};

/// Numerical failure inside a solver: eigen decomposition did not converge,
/// Lyapunov residual above tolerance, singular linear system. Exit code 2.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gainbound
