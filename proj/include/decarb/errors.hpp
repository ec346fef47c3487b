#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace decarb {

/// Evaluation outside the domain of a functional form (h <= h_bar, k_E <= 0, ...).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what, int period = -1)
      : std::domain_error(period >= 0 ? what + " (period " + std::to_string(period) + ")" : what),
        period_(period) {}
  int period() const noexcept { return period_; }

 private:
  int period_;
};

/// Invalid parameters, targets or run configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Newton / root-finder failure. Carries the residual-norm history.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::vector<double> norm_history = {}, std::vector<double> iterate = {})
      : std::runtime_error(what), history_(std::move(norm_history)), iterate_(std::move(iterate)) {}
  const std::vector<double>& norm_history() const noexcept { return history_; }
  double final_norm() const noexcept { return history_.empty() ? -1.0 : history_.back(); }
  /// Best iterate in the solver's raw unknowns (may be empty).
  const std::vector<double>& iterate() const noexcept { return iterate_; }

 private:
  std::vector<double> history_;
  std::vector<double> iterate_;
};

class CalibrationError : public std::runtime_error {
 public:
  CalibrationError(const std::string& what, std::string worst_target = {})
      : std::runtime_error(what), worst_target_(std::move(worst_target)) {}
  const std::string& worst_target() const noexcept { return worst_target_; }

 private:
  std::string worst_target_;
};

/// No admissible point exists (e.g. stationary housing below subsistence,
/// or a budget no instrument setting can meet).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two routes that must agree did not (signals a modeling or coding bug).
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace decarb
