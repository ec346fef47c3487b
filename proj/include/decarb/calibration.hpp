#pragma once

#include <string>
#include <vector>

#include "decarb/params.hpp"
#include "decarb/steady_state.hpp"

namespace decarb {

struct CalibrationTargets {
  double housing_exp_share = 0.233;
  double heat_cost_ratio = 1030.0 / 485.0;
  double renewable_share = 0.41;
  double residential_res_share = 0.26;
  double old_housing_share = 0.66;
  double land_price_normalization = 1.0;

  void validate() const;
  void set(const std::string& name, double value);
  static const std::vector<std::string>& field_names();
};

struct TargetRow {
  std::string name;
  double target;
  double model;
  double abs_error;
  double rel_error;
  bool flagged;
};

struct TargetReport {
  std::vector<TargetRow> rows;
  double tolerance = 1e-6;
  bool all_within() const;
  const TargetRow& row(const std::string& name) const;
};

struct CalibrationResult {
  ModelParameters params;
  SteadyState steady_state;
  TargetReport report;
};

/// Inverts the stationary targets for h_bar, kappa_bar, kappa_N, A_N0, Land
/// and k_bar, taking every other field of `fixed` as given; k^E/k_bar is
/// reported in k0E_ratio. The stationary point of the result is re-solved
/// numerically and checked against the targets.
CalibrationResult calibrate(const CalibrationTargets& targets, const ModelParameters& fixed);

/// Evaluates each target at a converged steady state.
TargetReport verify_calibration(const ModelParameters& p, const SteadyState& ss,
                                const CalibrationTargets& targets, double tolerance = 1e-6);

/// A calibrated parameter next to its published value and print precision.
struct PublishedCheck {
  std::string name;
  double published;
  int decimals;
  double model;
  bool within_rounding;
};

/// Compares the six calibrated parameters with the published table.
std::vector<PublishedCheck> compare_with_published(const ModelParameters& calibrated);

/// Disposable (factor) income per household.
double disposable_income(const ModelParameters& p, const SteadyState& ss);

/// Housing expenditure per household: maintenance, housing investment,
/// imputed land rent and energy spending.
double housing_expenditure(const ModelParameters& p, const SteadyState& ss);

}  // namespace decarb
