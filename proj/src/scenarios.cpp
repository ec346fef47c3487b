#include "decarb/scenarios.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>

#include "decarb/errors.hpp"
#include "decarb/reporting.hpp"

namespace decarb {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

ScenarioResult finish(std::string name, const TransitionProblem& problem, TransitionResult solved, double M0,
                      const ScenarioConfig& cfg, Clock::time_point t0) {
  ScenarioResult r;
  r.name = std::move(name);
  r.problem = problem;
  r.trajectory = std::move(solved.trajectory);
  r.diagnostics = std::move(solved.diagnostics);
  r.M0 = M0;
  r.window = cfg.budget_window;
  r.rule = cfg.rule;
  const Trajectory& tr = r.trajectory;
  r.instruments.p_C = tr.p_C;
  r.instruments.p_HC = tr.p_HC;
  r.instruments.tau_E = tr.tau_E;
  r.instruments.tau_H = tr.tau_H;
  r.instruments.cap_HC = problem.policy.cap_HC;
  r.instruments.budgets = problem.policy.budgets;
  r.cumulative_industry = tr.total_emissions(0, cfg.budget_window, Sector::Industry);
  r.cumulative_housing = tr.total_emissions(0, cfg.budget_window, Sector::Housing);
  r.wall_seconds = seconds_since(t0);
  return r;
}

/// Budget level whose Hotelling price starts near a quarter of p_R.
double price_level_guess(const Trajectory& baseline, double p_R) {
  return std::log(0.25 * p_R * baseline.multipliers.front().lambda);
}

BudgetConstraint hotelling_budget(std::string name, Sector sector, double budget, int window) {
  BudgetConstraint b;
  b.name = std::move(name);
  b.sector = sector;
  b.budget = budget;
  b.sum_begin = 0;
  b.sum_end = window;
  b.instrument = BudgetInstrument::CarbonPrice;
  b.price_industry = sector != Sector::Housing;
  b.price_housing = sector != Sector::Industry;
  b.start = 0;
  b.end = window;
  return b;
}

}  // namespace

BudgetRule parse_budget_rule(const std::string& name) {
  if (name == "cumulative30" || name == "cumulative") return BudgetRule::Cumulative;
  if (name == "flow30" || name == "flow") return BudgetRule::Flow;
  throw ConfigError("unknown budget rule '" + name + "' (expected cumulative30 or flow30)");
}

std::string to_string(BudgetRule rule) { return rule == BudgetRule::Cumulative ? "cumulative30" : "flow30"; }

void ScenarioConfig::validate(const ModelParameters& p) const {
  if (budget_window < 1 || budget_window >= p.T) throw ConfigError("budget window must lie in [1, T)");
  if (!(reduction > 0.0 && reduction < 1.0)) throw ConfigError("reduction must lie in (0,1)");
  if (!(cap_markup >= 0.0)) throw ConfigError("cap markup must be non-negative");
  if (cap_window < 0 || cap_window >= budget_window) throw ConfigError("cap window must lie in [0, budget window)");
  if (report_horizon < 1 || report_horizon > p.T) throw ConfigError("report horizon must lie in [1, T]");
  if (!(subsidy_length_guess >= 1.0)) throw ConfigError("subsidy length guess must be at least one period");
  if (!(subsidy_decay_guess > 0.0)) throw ConfigError("subsidy decay guess must be positive");
  if (subsidy_max_evaluations < 3) throw ConfigError("subsidy search needs at least 3 evaluations");
  solver.validate();
}

TransitionProblem base_problem(const ModelParameters& p, const SteadyState& ss) {
  TransitionProblem pb;
  pb.params = p;
  pb.tech = technology_paths(p);
  pb.initial = stocks_of(ss);
  return pb;
}

ScenarioResult run_no_policy(const ModelParameters& p, const ScenarioConfig& cfg) {
  cfg.validate(p);
  const auto t0 = Clock::now();
  const SteadyState ss = solve_steady_state(p);
  TransitionProblem frozen = base_problem(p, ss);
  frozen.tech = frozen_technology(p);
  const TransitionResult fixed_point = solve_transition(frozen, cfg.solver, replicate_steady_state(frozen, ss));
  const TransitionProblem pb = base_problem(p, ss);
  TransitionResult solved = solve_with_technology_homotopy(pb, cfg.solver, fixed_point.trajectory);
  return finish("no-policy", pb, std::move(solved), std::numeric_limits<double>::infinity(), cfg, t0);
}

ScenarioResult run_first_best_with_budget(const ScenarioResult& baseline, double M0, const ScenarioConfig& cfg) {
  const auto t0 = Clock::now();
  TransitionProblem pb = baseline.problem;
  BudgetConstraint b = hotelling_budget("total", Sector::Total, M0, cfg.budget_window);
  b.level_guess = price_level_guess(baseline.trajectory, pb.params.p_R);
  pb.policy.budgets = {b};
  pb.mode = SolveMode::Planner;
  pb.M0 = M0;
  Trajectory guess = baseline.trajectory;
  guess.border.clear();
  TransitionResult planner = solve_transition(pb, cfg.solver, guess);
  const Decentralization d = decentralize(planner.trajectory, pb, cfg.solver);
  ScenarioResult r = finish("first-best", pb, std::move(planner), M0, cfg, t0);
  r.instruments.p_C = d.instruments.p_C;
  r.instruments.p_HC = d.instruments.p_HC;
  r.wall_seconds = seconds_since(t0);
  return r;
}

ScenarioResult run_first_best(const ScenarioResult& baseline, const ScenarioConfig& cfg) {
  cfg.validate(baseline.problem.params);
  const Trajectory& bt = baseline.trajectory;
  const int W = cfg.budget_window;
  if (cfg.rule == BudgetRule::Cumulative)
    return run_first_best_with_budget(baseline, cfg.reduction * bt.total_emissions(0, W, Sector::Total), cfg);

  // flow rule: the window budget whose last-period flow hits the target
  const double target = cfg.reduction * (bt.emissions_industry[W - 1] + bt.emissions_housing[W - 1]);
  const double cumulative = bt.total_emissions(0, W, Sector::Total);
  ScenarioResult best;
  auto gap = [&](double log_M0) {
    best = run_first_best_with_budget(baseline, std::exp(log_M0), cfg);
    const Trajectory& t = best.trajectory;
    return std::log(t.emissions_industry[W - 1] + t.emissions_housing[W - 1]) - std::log(target);
  };
  double lo = std::log(0.3 * cfg.reduction * cumulative);
  double hi = std::log(std::min(0.98, 1.5 * cfg.reduction) * cumulative);
  const double f_lo = gap(lo), f_hi = gap(hi);
  if (!(f_lo < 0.0 && f_hi > 0.0)) {
    char msg[200];
    std::snprintf(msg, sizeof msg, "flow budget rule: target not bracketed (log gaps %.3e, %.3e)", f_lo, f_hi);
    throw SolverError(msg);
  }
  std::uintmax_t iters = 60;
  boost::math::tools::toms748_solve(gap, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(45), iters);
  if (std::abs(gap(std::log(best.M0))) > 1e-8) throw SolverError("flow budget rule: root search did not converge");
  return best;
}

SectorBudgets split_carbon_budget(const ScenarioResult& first_best) {
  SectorBudgets s;
  s.industry = first_best.cumulative_industry;
  s.housing = first_best.M0 - s.industry;
  return s;
}

ScenarioResult run_split_first_best(const ScenarioResult& first_best, const SectorBudgets& split,
                                    const ScenarioConfig& cfg) {
  const auto t0 = Clock::now();
  TransitionProblem pb = first_best.problem;
  const double level = first_best.trajectory.border.front();
  BudgetConstraint ind = hotelling_budget("industry", Sector::Industry, split.industry, cfg.budget_window);
  BudgetConstraint hou = hotelling_budget("housing", Sector::Housing, split.housing, cfg.budget_window);
  ind.level_guess = hou.level_guess = level;
  pb.policy.budgets = {ind, hou};
  Trajectory guess = first_best.trajectory;
  guess.border.clear();
  ScenarioResult r = finish("first-best-split", pb, solve_transition(pb, cfg.solver, guess), first_best.M0, cfg, t0);
  r.budgets = split;
  return r;
}

ScenarioResult run_phased_in(const ScenarioResult& first_best, const SectorBudgets& split,
                             const ScenarioConfig& cfg) {
  const auto t0 = Clock::now();
  TransitionProblem pb = first_best.problem;
  const ModelParameters& p = pb.params;
  pb.mode = SolveMode::Decentralized;
  pb.policy = {};
  pb.policy.p_C = first_best.instruments.p_C;
  pb.policy.p_HC.assign(cfg.cap_window, cfg.cap_markup * p.p_R);
  pb.policy.cap_HC = pb.policy.p_HC;
  BudgetConstraint hou = hotelling_budget("housing", Sector::Housing, split.housing, cfg.budget_window);
  hou.start = cfg.cap_window;
  hou.level_guess = first_best.trajectory.border.front() - cfg.cap_window * std::log(p.beta());
  pb.policy.budgets = {hou};
  Trajectory guess = first_best.trajectory;
  guess.border.clear();
  ScenarioResult r = finish("phased-in", pb, solve_transition(pb, cfg.solver, guess), first_best.M0, cfg, t0);
  r.budgets = split;
  return r;
}

std::vector<double> subsidy_shape(double decay, double length, int periods) {
  std::vector<double> s(periods, 0.0);
  for (int t = 0; t < periods; ++t) s[t] = std::exp(-decay * t) * std::clamp(length - t, 0.0, 1.0);
  return s;
}

SubsidyEvaluation evaluate_subsidy(const ScenarioResult& first_best, const SectorBudgets& split,
                                   const ScenarioConfig& cfg, double decay, double length, double tau_H,
                                   const Trajectory* guess) {
  TransitionProblem pb = first_best.problem;
  const int N = pb.periods();
  pb.mode = SolveMode::Decentralized;
  pb.policy = {};
  pb.policy.p_C = first_best.instruments.p_C;
  if (tau_H != 0.0) pb.policy.tau_H.assign(cfg.budget_window, tau_H);
  BudgetConstraint hou;
  hou.name = "housing";
  hou.sector = Sector::Housing;
  hou.budget = split.housing;
  hou.sum_begin = 0;
  hou.sum_end = cfg.budget_window;
  hou.instrument = BudgetInstrument::RetrofitSubsidy;
  hou.start = 0;
  hou.end = std::clamp(static_cast<int>(std::ceil(length)), 1, N);
  hou.shape = subsidy_shape(decay, length, N);
  hou.level_guess = 0.0;
  pb.policy.budgets = {hou};
  Trajectory g = guess ? *guess : first_best.trajectory;
  if (!guess) g.border.clear();
  SubsidyEvaluation ev;
  ev.problem = pb;
  ev.result = solve_transition(pb, cfg.solver, g);
  ev.level = logistic(ev.result.trajectory.border.front());
  ev.objective = discounted_welfare(ev.result.trajectory, pb.params, cfg.report_horizon);
  return ev;
}

namespace {

struct SubsidySearch {
  const ScenarioResult& fb;
  const SectorBudgets& split;
  ScenarioConfig cfg;
  Trajectory warm;
  bool have_warm = false;
  int evaluations = 0;
  int failures = 0;
  double best = -std::numeric_limits<double>::infinity();
};

double decay_of(double z) { return std::exp(z); }
double length_of(double z, int cap) { return 1.0 + (cap - 1.0) / (1.0 + std::exp(-z)); }

double subsidy_cost(const gsl_vector* z, void* data) {
  auto& s = *static_cast<SubsidySearch*>(data);
  ++s.evaluations;
  const int cap = s.cfg.report_horizon;
  try {
    SubsidyEvaluation ev = evaluate_subsidy(s.fb, s.split, s.cfg, decay_of(gsl_vector_get(z, 0)),
                                            length_of(gsl_vector_get(z, 1), cap), 0.0,
                                            s.have_warm ? &s.warm : nullptr);
    if (ev.objective > s.best) {
      s.best = ev.objective;
      s.warm = ev.result.trajectory;
      s.have_warm = true;
    }
    return -ev.objective;
  } catch (const std::exception&) {
    ++s.failures;
    return 1e30;
  }
}

}  // namespace

ScenarioResult run_subsidy(const ScenarioResult& first_best, const SectorBudgets& split, const ScenarioConfig& cfg) {
  const auto t0 = Clock::now();
  SubsidySearch search{first_best, split, cfg, {}, false, 0, 0, -std::numeric_limits<double>::infinity()};
  search.cfg.solver.polish = false;
  const int cap = cfg.report_horizon;

  gsl_set_error_handler_off();
  gsl_vector* z = gsl_vector_alloc(2);
  gsl_vector* step = gsl_vector_alloc(2);
  gsl_vector_set(z, 0, std::log(cfg.subsidy_decay_guess));
  const double frac = std::clamp((cfg.subsidy_length_guess - 1.0) / (cap - 1.0), 1e-3, 1.0 - 1e-3);
  gsl_vector_set(z, 1, std::log(frac / (1.0 - frac)));
  gsl_vector_set(step, 0, 0.7);
  gsl_vector_set(step, 1, 0.7);
  gsl_multimin_function fn{&subsidy_cost, 2, &search};
  gsl_multimin_fminimizer* nm = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2);
  gsl_multimin_fminimizer_set(nm, &fn, z, step);
  int status = GSL_CONTINUE;
  while (status == GSL_CONTINUE && search.evaluations < cfg.subsidy_max_evaluations) {
    if (gsl_multimin_fminimizer_iterate(nm) != GSL_SUCCESS) break;
    status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(nm), cfg.subsidy_simplex_tolerance);
  }
  const double decay = decay_of(gsl_vector_get(nm->x, 0));
  const double length = length_of(gsl_vector_get(nm->x, 1), cap);
  const double fmin = nm->fval;
  gsl_multimin_fminimizer_free(nm);
  gsl_vector_free(z);
  gsl_vector_free(step);

  if (!(fmin < 1e29))
    throw InfeasibleError("no retrofit subsidy path meets the housing budget of " + format_double(split.housing));

  SubsidyEvaluation ev = evaluate_subsidy(first_best, split, cfg, decay, length, 0.0, &search.warm);
  ScenarioResult r = finish("subsidy", ev.problem, std::move(ev.result), first_best.M0, cfg, t0);
  r.budgets = split;
  SubsidyBasis basis;
  basis.level = ev.level;
  basis.decay = decay;
  basis.length = length;
  basis.objective = ev.objective;
  basis.evaluations = search.evaluations;
  basis.failed_evaluations = search.failures;
  r.subsidy = basis;
  r.wall_seconds = seconds_since(t0);
  return r;
}

}  // namespace decarb
