#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace kinop {

// Malformed configuration or a parameter outside its admissible set.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of an operation
// (boundary fade values, Dirac limits, nonpositive Beta exponents).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A numerical precondition failed while stepping a solver.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what, std::optional<long> step = std::nullopt)
      : std::runtime_error(what), step_(step) {}
  std::optional<long> step() const { return step_; }
  SolverError at_step(long step) const {
    return SolverError(std::string(what()) + " (step " + std::to_string(step) + ")", step);
  }

 private:
  std::optional<long> step_;
};

// A controlled run was requested with parameters outside the admissible control set.
class InfeasibleControl : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kinop
