#pragma once

#include <optional>
#include <string>
#include <vector>

#include "decarb/transition.hpp"

namespace decarb {

enum class BudgetRule {
  Cumulative,  ///< window emissions = reduction x no-policy window emissions
  Flow         ///< emission flow in the last window period = reduction x no-policy flow
};

BudgetRule parse_budget_rule(const std::string& name);
std::string to_string(BudgetRule rule);

struct ScenarioConfig {
  int budget_window = 30;
  double reduction = 0.5;  ///< fraction of no-policy emissions allowed
  BudgetRule rule = BudgetRule::Cumulative;
  double cap_markup = 0.25;
  int cap_window = 10;
  int report_horizon = 60;
  SolverOptions solver;

  // subsidy search over tau_E(t) = level * exp(-decay t) * cutoff(t; length)
  double subsidy_decay_guess = 0.05;
  double subsidy_length_guess = 15.0;
  int subsidy_max_evaluations = 120;
  double subsidy_simplex_tolerance = 1e-4;

  void validate(const ModelParameters& p) const;
};

struct SectorBudgets {
  double industry = 0.0;
  double housing = 0.0;
};

struct SubsidyBasis {
  double level = 0.0;   ///< logistic of the solved level unknown
  double decay = 0.0;
  double length = 0.0;  ///< periods the subsidy is paid, fractional last period
  double objective = 0.0;
  int evaluations = 0;
  int failed_evaluations = 0;
};

struct ScenarioResult {
  std::string name;
  TransitionProblem problem;
  Trajectory trajectory;
  PolicyInstruments instruments;  ///< realized exogenous paths
  Diagnostics diagnostics;
  double M0 = 0.0;
  int window = 0;
  BudgetRule rule = BudgetRule::Cumulative;
  double cumulative_industry = 0.0;  ///< over the budget window
  double cumulative_housing = 0.0;
  std::optional<SectorBudgets> budgets;
  std::optional<SubsidyBasis> subsidy;
  double wall_seconds = 0.0;
};

/// Problem with initial stocks at the stationary point of p, full technology
/// progress and no policy.
TransitionProblem base_problem(const ModelParameters& p, const SteadyState& ss);

ScenarioResult run_no_policy(const ModelParameters& p, const ScenarioConfig& cfg);

/// Planner solve against the total window budget, then decentralized with
/// uniform carbon prices.
ScenarioResult run_first_best(const ScenarioResult& baseline, const ScenarioConfig& cfg);

/// First-best with a given total budget (no rule applied).
ScenarioResult run_first_best_with_budget(const ScenarioResult& baseline, double M0, const ScenarioConfig& cfg);

/// Sectoral cumulative emissions of the first best over its window.
SectorBudgets split_carbon_budget(const ScenarioResult& first_best);

/// First best with the split imposed as two separately priced budgets.
ScenarioResult run_split_first_best(const ScenarioResult& first_best, const SectorBudgets& split,
                                    const ScenarioConfig& cfg);

ScenarioResult run_phased_in(const ScenarioResult& first_best, const SectorBudgets& split,
                             const ScenarioConfig& cfg);

/// Outcome of one candidate subsidy path.
struct SubsidyEvaluation {
  TransitionProblem problem;
  TransitionResult result;
  double level = 0.0;
  double objective = 0.0;
};

/// Competitive equilibrium with the industry at first-best prices, no housing
/// carbon price and the retrofit subsidy level solved so the housing budget
/// binds. tau_H adds a constant housing-capital subsidy.
SubsidyEvaluation evaluate_subsidy(const ScenarioResult& first_best, const SectorBudgets& split,
                                   const ScenarioConfig& cfg, double decay, double length, double tau_H = 0.0,
                                   const Trajectory* guess = nullptr);

/// Nelder-Mead over (decay, length) maximizing discounted welfare.
ScenarioResult run_subsidy(const ScenarioResult& first_best, const SectorBudgets& split, const ScenarioConfig& cfg);

/// Subsidy shape for the given basis on t = 0..periods-1.
std::vector<double> subsidy_shape(double decay, double length, int periods);

}  // namespace decarb
