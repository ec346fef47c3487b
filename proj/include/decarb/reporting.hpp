#pragma once

#include <string>
#include <vector>

#include "decarb/scenarios.hpp"

namespace decarb {

/// Sum of beta^t u(c_t, h_t) for t < horizon.
double discounted_welfare(const Trajectory& traj, const ModelParameters& p, int horizon);

/// Uniform proportional consumption change that equates baseline welfare with
/// the scenario's welfare.
double consumption_equivalent(const Trajectory& scenario, const Trajectory& baseline, const ModelParameters& p,
                              int horizon);

/// Discounted sums over the reporting horizon, in final-good units per household.
struct CostTotals {
  double welfare = 0.0;
  double energy_costs = 0.0;
  double net_housing_costs = 0.0;
  double gross_housing_costs = 0.0;
  double disposable_income = 0.0;
  double transfers = 0.0;          ///< all lump-sum transfers
  double housing_transfers = 0.0;  ///< housing carbon revenue net of subsidies
  double income_net_of_transfers = 0.0;
  double output = 0.0;
  double energy_production = 0.0;
};

CostTotals cost_totals(const Trajectory& traj, const ModelParameters& p, int horizon);

/// Imputed land rent per household, (u_h/u_c) a_h h.
double imputed_land_rent(const Trajectory& traj, const ModelParameters& p, int t);

/// One comparison column: relative changes against the baseline, except the
/// transfer share, which is a level.
struct ComparisonRow {
  std::string scenario;
  double welfare = 0.0;
  double welfare_cev = 0.0;
  double energy_costs = 0.0;
  double net_housing_costs = 0.0;
  double gross_housing_costs = 0.0;
  double disposable_income = 0.0;
  double transfers_share = 0.0;
  double output = 0.0;
  double energy_production = 0.0;
};

ComparisonRow cost_metrics(const Trajectory& traj, const Trajectory& baseline, const ModelParameters& p,
                           int horizon, const std::string& name = {});

struct ComparisonReport {
  int horizon = 0;
  std::vector<ComparisonRow> rows;
  std::vector<std::string> eeg_names;
  std::vector<std::vector<double>> eeg;

  /// Table metric names in display order with their values per row.
  static const std::vector<std::string>& metric_names();
  static double metric(const ComparisonRow& row, const std::string& name);
};

ComparisonReport compare(const ScenarioResult& baseline, const std::vector<const ScenarioResult*>& scenarios,
                         int horizon);

/// Old-to-new energy intensity (kappa_N + kappa_bar/k_E)/kappa_N, raw.
std::vector<double> intensity_ratio(const Trajectory& traj, const ModelParameters& p);

/// intensity_ratio normalized by its t = 0 value.
std::vector<double> eeg_path(const Trajectory& traj, const ModelParameters& p);

/// Trajectory columns in export order.
const std::vector<std::string>& trajectory_columns();
/// Column values of period t.
std::vector<double> trajectory_row(const Trajectory& traj, const ModelParameters& p, int t);
/// One-line description per column.
const std::vector<std::pair<std::string, std::string>>& data_dictionary();

/// RFC-4180 CSV with a header row and shortest round-trip decimals.
void write_trajectory_csv(const std::string& path, const Trajectory& traj, const ModelParameters& p);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv(const std::string& path);

/// Rebuilds the recorded fields of a trajectory from its exported CSV.
Trajectory trajectory_from_csv(const CsvTable& table, const ModelParameters& p);

std::string comparison_tsv(const ComparisonReport& report);
std::string comparison_text(const ComparisonReport& report);

/// Writes one CSV per scenario, the comparison table (TSV and text), the EEG
/// paths, the data dictionary and a run manifest. Throws IoError if the
/// destination is unwritable and ConfigError if there are no results.
struct ExportOptions {
  std::string resolved_config;  ///< written verbatim next to the outputs
  std::string code_version = "1.0.0";
  int report_horizon = 60;
};
void export_results(const std::vector<const ScenarioResult*>& results, const std::string& destination,
                    const ExportOptions& options = {});

/// JSON manifest text of one scenario.
std::string scenario_manifest(const ScenarioResult& r, const ExportOptions& options);

/// Formats a double with the shortest round-trip representation.
std::string format_double(double v);
double parse_double(const std::string& s);

}  // namespace decarb
