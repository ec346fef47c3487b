#pragma once

#include <string>
#include <utility>
#include <vector>

#include "decarb/model.hpp"
#include "decarb/policy.hpp"
#include "decarb/steady_state.hpp"

namespace decarb {

struct StockVector {
  double K_Y = 0, K_F = 0, K_N = 0, k_H = 0, k_E = 0;
};

enum class TerminalCondition {
  RepeatStocks,  ///< stocks after the last period equal those of the last period
  FixedStocks    ///< stocks after the last period are given
};

enum class SolveMode { Decentralized, Planner };

struct TransitionProblem {
  ModelParameters params;
  TechnologyPaths tech;
  PolicyInstruments policy;
  StockVector initial;
  double M0 = std::numeric_limits<double>::infinity();  ///< total budget (record)
  TerminalCondition terminal = TerminalCondition::RepeatStocks;
  StockVector terminal_stocks;
  SolveMode mode = SolveMode::Decentralized;

  int periods() const { return params.T; }
  void validate() const;
};

struct SolverOptions {
  double tolerance = 1e-11;           ///< residual infinity norm at the final stage
  double stage_tolerance = 1e-8;      ///< residual norm for intermediate smoothing stages
  int max_iterations = 80;            ///< Newton iterations per stage
  double backtrack = 0.5;
  double max_log_step = 2.0;          ///< cap on a Newton step in log units
  std::vector<double> eps_schedule = {1e-2, 1e-4, 1e-6, 1e-8};
  bool polish = true;                 ///< exact active-set pass after smoothing
  bool check_jacobian = false;        ///< compare the Jacobian with finite differences
  bool verbose = false;

  void validate() const;
};

struct Diagnostics {
  bool converged = false;
  int iterations = 0;
  double final_norm = 0.0;
  std::vector<double> norm_history;
  double eps_final = 0.0;
  bool polished = false;
  double complementarity_max = 0.0;   ///< max |(i/k_bar) * (phi/lambda)|
  double budget_slack_max = 0.0;      ///< max relative budget gap
  double market_clearing_max = 0.0;
  double government_budget_max = 0.0;
  double walras_max = 0.0;            ///< household budget recomputed ex post
  double jacobian_fd_error = -1.0;
  std::vector<std::pair<int, int>> binding_H;  ///< [first, last] periods with i_H = 0
  std::vector<std::pair<int, int>> binding_E;
};

struct Trajectory {
  int periods = 0;
  std::vector<PeriodAllocation> alloc;
  std::vector<PriceSystem> prices;
  std::vector<MultiplierSet> multipliers;
  std::vector<double> p_C, p_HC, tau_E, tau_H, Gamma;
  std::vector<double> mu_C, mu_HC;      ///< budget multipliers in current-value utility units
  std::vector<double> emissions_industry, emissions_housing;
  std::vector<double> M;                ///< remaining budget, t = 0..periods
  std::vector<double> welfare_flow;     ///< period utility
  StockVector terminal;                 ///< stocks after the last period
  std::vector<double> border;           ///< solved budget-instrument levels
  std::vector<double> x;                ///< raw unknowns for warm starts

  double total_emissions(int begin, int end, Sector sector) const;
};

struct TransitionResult {
  Trajectory trajectory;
  Diagnostics diagnostics;
};

constexpr int kUnknownsPerPeriod = 11;
constexpr int kMaxBorder = 5;

/// Per-period unknowns: log of the five next-period stocks, log e, log res,
/// log Res_F, log E_Y, and the two irreversibility multipliers over lambda.
/// Budget-instrument levels follow after the last period.
std::vector<double> assemble_residuals(const std::vector<double>& x, const TransitionProblem& problem,
                                       double eps);

/// Residuals of a recorded trajectory (uses its raw unknowns).
std::vector<double> assemble_residuals(const Trajectory& traj, const TransitionProblem& problem, double eps);

/// Smoothed Fischer-Burmeister function.
double fischer_burmeister(double a, double b, double eps);

/// Damped Newton with smoothing continuation and an active-set polish.
/// Throws SolverError on failure.
TransitionResult solve_transition(const TransitionProblem& problem, const SolverOptions& options,
                                  const Trajectory& initial_guess);

/// Raw unknown vector that replicates a steady state at every period.
Trajectory replicate_steady_state(const TransitionProblem& problem, const SteadyState& ss);

/// Guess for a problem of another horizon: periods are truncated or the last
/// one repeated; budget levels are carried over when the counts agree.
Trajectory adapt_guess(const Trajectory& guess, const TransitionProblem& problem);

/// Rebuilds the full record from raw unknowns.
Trajectory build_trajectory(const std::vector<double>& x, const TransitionProblem& problem);

/// Continuation from frozen to full technology, each stage warm-started.
TransitionResult solve_with_technology_homotopy(const TransitionProblem& problem, const SolverOptions& options,
                                                const Trajectory& frozen_guess);

/// Exogenous instruments that reproduce a planner (budget-priced) solution,
/// with the decentralized re-solve and its maximum allocation gap.
struct Decentralization {
  PolicyInstruments instruments;
  std::vector<double> tau;  ///< carbon tax rate p_C/p_R
  TransitionResult resolved;
  double max_relative_gap = 0.0;
};
Decentralization decentralize(const Trajectory& planner, const TransitionProblem& problem,
                              const SolverOptions& options, double tolerance = 1e-7);

StockVector stocks_of(const SteadyState& ss);

/// Text checkpoint of the raw unknowns with round-trip decimal floats.
void save_checkpoint(const std::string& path, const Trajectory& traj);
Trajectory load_checkpoint(const std::string& path);

}  // namespace decarb
