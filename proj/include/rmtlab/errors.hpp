#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rmtlab {

/// Bad arguments or configuration. The CLI maps these to exit status 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to reach its target (root solve, quadrature,
/// time stepping).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Coincident particles where the log-gas energy or its derivatives diverge.
class SingularConfiguration : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Potential outside the supported single-interval class.
class UnsupportedPotential : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Markov chain failed its post-tuning health checks.
class DiagnosticsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A DBM step could not preserve ordering even after maximal refinement.
class StepFailure : public std::runtime_error {
 public:
  StepFailure(const std::string& what, std::vector<int> indices)
      : std::runtime_error(what), indices_(std::move(indices)) {}
  const std::vector<int>& indices() const noexcept { return indices_; }

 private:
  std::vector<int> indices_;
};

}  // namespace rmtlab
