#include <cmath>
#include <filesystem>

#include "decarb/errors.hpp"
#include "decarb/transition.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace decarb;
using decarb::testing::calibrated_params;
using decarb::testing::small_problem;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }
double rel_strict(double a, double b) { return std::abs(a - b) / std::abs(b); }

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

SolverOptions quiet() { return SolverOptions{}; }

BudgetConstraint total_budget(double M, int window, double level_guess) {
  BudgetConstraint b;
  b.name = "total";
  b.sector = Sector::Total;
  b.budget = M;
  b.sum_begin = 0;
  b.sum_end = window;
  b.start = 0;
  b.end = window;
  b.level_guess = level_guess;
  return b;
}

}  // namespace

TEST_CASE("replicated steady state solves the frozen-technology system") {
  TransitionProblem pb = small_problem(20);
  const SteadyState ss = solve_steady_state(pb.params);
  pb.tech = frozen_technology(pb.params);
  const Trajectory guess = replicate_steady_state(pb, ss);
  CHECK(inf_norm(assemble_residuals(guess.x, pb, 0.0)) < 1e-9);

  const TransitionResult r = solve_transition(pb, quiet(), guess);
  CHECK(r.diagnostics.converged);
  for (int t = 0; t < pb.periods(); ++t) {
    CHECK(rel(r.trajectory.alloc[t].K_Y, ss.alloc.K_Y) < 1e-9);
    CHECK(rel(r.trajectory.alloc[t].k_H, ss.alloc.k_H) < 1e-9);
    CHECK(rel(r.trajectory.alloc[t].k_E, ss.alloc.k_E) < 1e-9);
    CHECK(rel(r.trajectory.alloc[t].c, ss.alloc.c) < 1e-9);
  }
}

TEST_CASE("technology growth moves the replicated steady state off the solution") {
  TransitionProblem pb = small_problem(20);
  const SteadyState ss = solve_steady_state(pb.params);
  CHECK(inf_norm(assemble_residuals(replicate_steady_state(pb, ss).x, pb, 0.0)) > 1e-6);
}

TEST_CASE("smoothed Fischer-Burmeister identities") {
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    CHECK(fischer_burmeister(0.0, 3.0, eps) == doctest::Approx(-eps * eps / 6.0).epsilon(1e-4));
    // on the zero set a, b > 0 and a b = eps^2/2
    for (double a : {1e-3, 0.1, 2.0}) {
      const double b = eps * eps / (2.0 * a);
      CHECK(std::abs(fischer_burmeister(a, b, eps)) < 1e-14);
    }
  }
  CHECK(fischer_burmeister(0.0, 3.0, 0.0) == 0.0);
  CHECK(fischer_burmeister(2.0, 0.0, 0.0) == 0.0);
  CHECK(fischer_burmeister(-1.0, 1.0, 0.0) < 0.0);
}

TEST_CASE("residual blocks depend only on neighbouring periods") {
  TransitionProblem pb = small_problem(12);
  const SteadyState ss = solve_steady_state(pb.params);
  const Trajectory guess = replicate_steady_state(pb, ss);
  const auto base = assemble_residuals(guess.x, pb, 1e-4);
  const int NU = kUnknownsPerPeriod;
  for (int j = 0; j < NU; ++j) {
    std::vector<double> x = guess.x;
    x[NU * 5 + j] += 1e-4;
    const auto F = assemble_residuals(x, pb, 1e-4);
    for (int t = 0; t < pb.periods(); ++t) {
      bool changed = false;
      for (int i = 0; i < NU; ++i) changed = changed || F[NU * t + i] != base[NU * t + i];
      if (t < 4 || t > 6) CHECK_MESSAGE(!changed, "unknown ", j, " of period 5 reaches block ", t);
    }
  }
}

TEST_CASE("analytic Jacobian matches finite differences") {
  TransitionProblem pb = small_problem(8, {0.95, 0.9, 1.05, 0.97, 0.98});
  const SteadyState ss = solve_steady_state(pb.params);
  SolverOptions o;
  o.check_jacobian = true;
  const TransitionResult r = solve_transition(pb, o, replicate_steady_state(pb, ss));
  CHECK(r.diagnostics.jacobian_fd_error >= 0.0);
  CHECK(r.diagnostics.jacobian_fd_error < 1e-6);
}

TEST_CASE("three-period planner matches direct maximization") {
  const oracle::ThreePeriodComparison r = oracle::three_period_comparison();
  MESSAGE("largest relative gap to the direct optimum: ", r.max_rel_error);
  CHECK(r.max_rel_error < 1e-5);
  CHECK(r.max_investment_error < 1e-5);
  // the instance exercises a binding irreversibility constraint
  CHECK(r.irreversibility_binds);
  CHECK(r.solved.alloc[0].i_H == doctest::Approx(0.0));
  CHECK(r.seconds < 60.0);
}

TEST_CASE("planner prices decentralize to the same allocation") {
  TransitionProblem pb = small_problem(40);
  const SteadyState ss = solve_steady_state(pb.params);
  const TransitionResult base = solve_with_technology_homotopy(pb, quiet(), replicate_steady_state(pb, ss));
  const double M = 0.6 * base.trajectory.total_emissions(0, 10, Sector::Total);
  TransitionProblem planner = pb;
  planner.mode = SolveMode::Planner;
  planner.M0 = M;
  planner.policy.budgets = {total_budget(M, 10, std::log(0.2 * pb.params.p_R * base.trajectory.multipliers[0].lambda))};
  Trajectory guess = base.trajectory;
  guess.border.clear();
  const TransitionResult r = solve_transition(planner, quiet(), guess);
  REQUIRE(r.diagnostics.converged);
  const Trajectory& tr = r.trajectory;

  const Decentralization d = decentralize(tr, planner, quiet());
  CHECK(d.max_relative_gap < 1e-7);
  for (int t = 0; t < pb.periods(); ++t) {
    CHECK(tr.p_C[t] == doctest::Approx(tr.p_HC[t]).epsilon(1e-12));
    CHECK(d.tau[t] * pb.params.p_R == doctest::Approx(tr.p_C[t]).epsilon(1e-12));
    // the household resource condition prices emissions at the same rate
    CHECK(tr.p_C[t] == doctest::Approx(tr.multipliers[t].mu_R / tr.multipliers[t].lambda).epsilon(1e-10));
  }
  // shadow value grows at the rate of time preference while the budget binds
  for (int t = 0; t + 1 < 10; ++t)
    CHECK(tr.multipliers[t + 1].mu_R / tr.multipliers[t].mu_R - 1.0 == doctest::Approx(pb.params.rho).epsilon(1e-9));
  CHECK(tr.total_emissions(0, 10, Sector::Total) == doctest::Approx(M).epsilon(1e-10));
}

TEST_CASE("an unbounded budget recovers zero taxes") {
  TransitionProblem pb = small_problem(20);
  const SteadyState ss = solve_steady_state(pb.params);
  pb.tech = frozen_technology(pb.params);
  const TransitionResult r = solve_transition(pb, quiet(), replicate_steady_state(pb, ss));
  const Decentralization d = decentralize(r.trajectory, pb, quiet());
  for (double tau : d.tau) CHECK(tau == 0.0);
  CHECK(d.max_relative_gap < 1e-12);
}

TEST_CASE("irreversibility binds when housing starts above its stationary level") {
  TransitionProblem pb = small_problem(40, {1, 1, 1, 1.25, 1});
  const SteadyState ss = solve_steady_state(pb.params);
  pb.tech = frozen_technology(pb.params);
  const TransitionResult r = solve_transition(pb, quiet(), replicate_steady_state(pb, ss));
  REQUIRE(r.diagnostics.converged);
  const Trajectory& tr = r.trajectory;
  CHECK(tr.alloc[0].i_H == doctest::Approx(0.0));
  CHECK(tr.multipliers[0].phi_H > 0.0);
  REQUIRE(!r.diagnostics.binding_H.empty());
  CHECK(r.diagnostics.binding_H.front().first == 0);
  for (int t = 0; t < pb.periods(); ++t) {
    CHECK(tr.alloc[t].i_H >= -1e-12);
    CHECK(tr.alloc[t].i_E >= -1e-12);
    CHECK(std::abs(tr.alloc[t].i_H * tr.multipliers[t].phi_H) < 1e-12);
    CHECK(tr.multipliers[t].phi_H >= 0.0);
  }
  CHECK(r.diagnostics.complementarity_max < 1e-8);
  CHECK(r.diagnostics.market_clearing_max < 1e-9);
  CHECK(r.diagnostics.walras_max < 1e-9);
}

TEST_CASE("Euler residual of final-good capital holds on the solution") {
  TransitionProblem pb = small_problem(30, {0.9, 1, 1, 1, 1});
  const SteadyState ss = solve_steady_state(pb.params);
  const TransitionResult r = solve_with_technology_homotopy(pb, quiet(), replicate_steady_state(pb, ss));
  const Trajectory& tr = r.trajectory;
  const double beta = pb.params.beta();
  for (int t = 0; t + 1 < pb.periods(); ++t) {
    const double lhs = tr.multipliers[t].lambda / (beta * tr.multipliers[t + 1].lambda);
    CHECK(std::abs(lhs - (1.0 - pb.params.delta_Y) - tr.prices[t + 1].R) < 1e-10);
  }
}

TEST_CASE("truncation does not reach the reporting window") {
  TransitionProblem pb = small_problem(150);
  const SteadyState ss = solve_steady_state(pb.params);
  TransitionProblem frozen = pb;
  frozen.tech = frozen_technology(pb.params);
  const TransitionResult fixed = solve_transition(frozen, quiet(), replicate_steady_state(frozen, ss));
  const TransitionResult a = solve_with_technology_homotopy(pb, quiet(), fixed.trajectory);

  TransitionProblem longer = small_problem(175);
  const TransitionResult b = solve_transition(longer, quiet(), adapt_guess(a.trajectory, longer));
  REQUIRE(b.diagnostics.converged);
  double worst = 0.0;
  for (int t = 0; t < 60; ++t) {
    const PeriodAllocation& x = a.trajectory.alloc[t];
    const PeriodAllocation& y = b.trajectory.alloc[t];
    for (auto [u, v] : {std::pair{x.c, y.c}, {x.K_Y, y.K_Y}, {x.K_F, y.K_F}, {x.K_N, y.K_N}, {x.k_H, y.k_H},
                        {x.k_E, y.k_E}, {x.res, y.res}, {x.Res_F, y.Res_F}})
      worst = std::max(worst, rel_strict(u, v));
  }
  MESSAGE("largest relative change over 60 periods: ", worst);
  CHECK(worst < 1e-6);
}

TEST_CASE("checkpoint round trip is exact") {
  TransitionProblem pb = small_problem(10, {0.95, 1, 1, 1, 1});
  const SteadyState ss = solve_steady_state(pb.params);
  const TransitionResult r = solve_transition(pb, quiet(), replicate_steady_state(pb, ss));
  const auto path = (std::filesystem::temp_directory_path() / "decarb_checkpoint_test.txt").string();
  save_checkpoint(path, r.trajectory);
  const Trajectory back = load_checkpoint(path);
  std::filesystem::remove(path);
  REQUIRE(back.x.size() == r.trajectory.x.size());
  for (size_t i = 0; i < back.x.size(); ++i) CHECK(back.x[i] == r.trajectory.x[i]);
  // a converged point restarts at once
  const TransitionResult again = solve_transition(pb, quiet(), back);
  CHECK(again.diagnostics.final_norm < 1e-11);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/checkpoint.txt"), IoError);
}

TEST_CASE("failure reports the best iterate") {
  TransitionProblem pb = small_problem(10, {0.95, 1, 1, 1, 1});
  const SteadyState ss = solve_steady_state(pb.params);
  SolverOptions o;
  o.max_iterations = 1;
  o.eps_schedule = {1e-8};
  try {
    solve_transition(pb, o, replicate_steady_state(pb, ss));
    FAIL("expected a solver error");
  } catch (const SolverError& e) {
    CHECK(e.iterate().size() == static_cast<size_t>(kUnknownsPerPeriod * pb.periods()));
    CHECK(!e.norm_history().empty());
  }
}

TEST_CASE("problem validation") {
  TransitionProblem pb = small_problem(10);
  pb.mode = SolveMode::Planner;
  CHECK_THROWS_AS(pb.validate(), ConfigError);
  pb.mode = SolveMode::Decentralized;
  pb.policy.tau_E = {1.5};
  CHECK_THROWS_AS(pb.validate(), ConfigError);
  pb.policy.tau_E.clear();
  pb.policy.budgets = {total_budget(1.0, 20, 0.0)};
  CHECK_THROWS_AS(pb.validate(), ConfigError);
  SolverOptions o;
  o.backtrack = 1.5;
  CHECK_THROWS_AS(o.validate(), ConfigError);
}
