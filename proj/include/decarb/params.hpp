#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace decarb {

/// Structural constants of the economy. Defaults reproduce the published
/// calibration table where it lists a value; k_bar, n, L_total and p_R are
/// normalizations the table does not report.
struct ModelParameters {
  // final good
  double a = 0.95;
  double sigma = 0.40;
  double a_Z = 0.35;
  double A_Y0 = 1.00;
  // electricity
  double a_E = 0.57;
  double sigma_E = 4.70;
  double a_F = 0.80;
  double sigma_F = 0.20;
  double A_N0 = 0.69;
  // households
  double phi = 0.80;
  double h_bar = 1.62;
  double a_h = 0.35;
  double a_ene = 0.14;
  double sigma_ene = 0.89;
  double kappa_N = 0.02;
  double kappa_bar = 0.005;
  double eta = 1.00;
  double rho = 0.02;
  // depreciation
  double delta_Y = 0.10;
  double delta_F = 0.10;
  double delta_N = 0.10;
  double delta_H = 0.02;
  double delta_E = 0.03;
  // endowments
  double Land = 501.23;
  double k_bar = 1.0;
  double k0E_ratio = 0.08;
  // technology
  double a_Y = 0.0859;
  double b_Y = 0.0072;
  double g_N = 0.01;
  // normalizations
  double n = 1.0;
  double L_total = 1.0;
  double p_R = 0.1003814226;
  int T = 150;

  double beta() const { return 1.0 / (1.0 + rho); }
  double land_per_household() const { return Land / n; }

  /// Throws ConfigError naming the first violated invariant.
  void validate() const;

  /// Sets a field by name; throws ConfigError on unknown names or bad values.
  void set(std::string_view name, double value);
  double get(std::string_view name) const;

  static const std::vector<std::string>& field_names();
};

/// Published calibration-table values (also the struct defaults).
ModelParameters table1_parameters();

}  // namespace decarb
