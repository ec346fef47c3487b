#include <cmath>

#include "decarb/calibration.hpp"
#include "decarb/errors.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace decarb;
using decarb::testing::calibrated_params;

namespace {

const CalibrationResult& calibrated() {
  static const CalibrationResult r = calibrate(CalibrationTargets{}, table1_parameters());
  return r;
}

}  // namespace

TEST_CASE("stationary rental rates equal rho plus depreciation") {
  const SteadyState& ss = calibrated().steady_state;
  const ModelParameters& p = calibrated().params;
  CHECK(std::abs(ss.prices.R - 0.12) < 1e-10);
  CHECK(std::abs(ss.prices.R - (1.0 / p.beta() - (1.0 - p.delta_Y))) < 1e-12);
  CHECK(std::abs(ss.prices.R_F - ss.prices.R) < 1e-10);
  CHECK(std::abs(ss.prices.R_N - ss.prices.R) < 1e-10);
}

TEST_CASE("stationary point solves its own system") {
  const SteadyState& ss = calibrated().steady_state;
  const ModelParameters& p = calibrated().params;
  CHECK(ss.residual_norm < 1e-10);
  CHECK(ss.min_singular_value > 1e-6);
  const PeriodAllocation& a = ss.alloc;
  CHECK(a.i_H == doctest::Approx(p.delta_H * a.k_H).epsilon(1e-10));
  CHECK(a.i_E == doctest::Approx(p.delta_E * a.k_E).epsilon(1e-10));
  CHECK(a.i_Y == doctest::Approx(p.delta_Y * a.k_Y).epsilon(1e-10));
  CHECK(a.i_F == doctest::Approx(p.delta_F * a.k_F).epsilon(1e-10));
  CHECK(a.i_N == doctest::Approx(p.delta_N * a.k_N).epsilon(1e-10));
  CHECK(ss.multipliers.phi_H == 0.0);
  CHECK(ss.multipliers.phi_E == 0.0);
  CHECK(a.h > p.h_bar);
  // electricity market and the final-good balance
  CHECK(std::abs(a.E_Y + p.n * a.e - a.E) / a.E < 1e-10);
  const double spending = p.n * (a.c + a.i_H + a.i_E + p.delta_H * p.k_bar) + p.n * (a.i_Y + a.i_F + a.i_N) +
                          p.p_R * (p.n * a.res + a.Res_F);
  CHECK(std::abs(spending - a.Y) / a.Y < 1e-10);
}

TEST_CASE("calibrated targets reproduce their inputs") {
  const CalibrationResult& r = calibrated();
  const CalibrationTargets t;
  CHECK(r.report.all_within());
  const auto& rows = r.report.rows;
  CHECK(rows.size() == 6);
  for (const auto& row : rows) {
    CHECK_MESSAGE(std::abs(row.model - row.target) <= 1e-8 * std::abs(row.target), row.name);
    CHECK(!row.flagged);
  }
  CHECK(std::abs(r.report.row("housing_exp_share").model - 0.233) < 1e-8);
  CHECK(std::abs(r.report.row("renewable_share").model - 0.41) < 1e-8);
  CHECK(std::abs(r.report.row("residential_res_share").model - 0.26) < 1e-8);
  CHECK(std::abs(r.report.row("old_housing_share").model - 0.66) < 1e-8);

  // each target recomputed from raw quantities
  const SteadyState& ss = r.steady_state;
  const ModelParameters& p = r.params;
  const PeriodAllocation& a = ss.alloc;
  CHECK(a.E_N / (a.E_N + a.E_F) == doctest::Approx(t.renewable_share).epsilon(1e-10));
  CHECK(p.n * a.res / (p.n * a.res + a.Res_F) == doctest::Approx(t.residential_res_share).epsilon(1e-10));
  CHECK(p.k_bar / (p.k_bar + a.k_H) == doctest::Approx(t.old_housing_share).epsilon(1e-10));
  CHECK(ss.land_price == doctest::Approx(1.0).epsilon(1e-10));
  const double income = ss.prices.w * p.L_total / p.n + ss.prices.R * a.k_Y + ss.prices.R_F * a.k_F +
                        ss.prices.R_N * a.k_N;
  const double housing = p.delta_H * p.k_bar + a.i_H + ss.land_rent + ss.prices.p_ene * a.ene;
  CHECK(housing / income == doctest::Approx(t.housing_exp_share).epsilon(1e-10));
  CHECK(income == doctest::Approx(disposable_income(p, ss)).epsilon(1e-12));
  CHECK(housing == doctest::Approx(housing_expenditure(p, ss)).epsilon(1e-12));
}

TEST_CASE("heat cost ratio inverts exactly") {
  const CalibrationResult& r = calibrated();
  const ModelParameters& p = r.params;
  const double kE = r.steady_state.alloc.k_E;
  CHECK((p.kappa_bar / kE + p.kappa_N) / p.kappa_N == doctest::Approx(1030.0 / 485.0).epsilon(1e-12));
  CHECK(p.kappa_bar / kE == doctest::Approx(p.kappa_N * (1030.0 / 485.0 - 1.0)).epsilon(1e-12));
  CHECK(p.k0E_ratio == doctest::Approx(kE / p.k_bar).epsilon(1e-12));
}

TEST_CASE("raising the renewable share raises A_N0") {
  CalibrationTargets t;
  t.renewable_share = 0.45;
  const CalibrationResult r = calibrate(t, table1_parameters());
  CHECK(r.report.all_within());
  CHECK(r.params.A_N0 > calibrated().params.A_N0);
}

TEST_CASE("perturbed land is flagged") {
  ModelParameters p = calibrated().params;
  p.Land *= 1.1;
  const SteadyState ss = solve_steady_state(p);
  const TargetReport rep = verify_calibration(p, ss, CalibrationTargets{});
  CHECK(!rep.all_within());
  CHECK(rep.row("land_price_normalization").flagged);
}

TEST_CASE("published table values evaluated against the targets") {
  const ModelParameters p = table1_parameters();
  const SteadyState ss = solve_steady_state(p);
  const TargetReport rep = verify_calibration(p, ss, CalibrationTargets{});
  double worst = 0.0;
  for (const auto& row : rep.rows) worst = std::max(worst, row.rel_error);
  MESSAGE("largest relative target error at the published values: ", worst);
  CHECK(worst > 0.0);
}

TEST_CASE("published comparison honours print precision") {
  ModelParameters p = table1_parameters();
  for (const auto& c : compare_with_published(p)) CHECK_MESSAGE(c.within_rounding, c.name);
  p.h_bar = 1.6251;
  p.Land = 501.2349;
  for (const auto& c : compare_with_published(p)) {
    if (c.name == "h_bar") CHECK(!c.within_rounding);
    if (c.name == "Land") CHECK(c.within_rounding);
  }
  CHECK(compare_with_published(p).size() == 6);
}

TEST_CASE("fossil electricity elasticity defaults to the table value") {
  CHECK(table1_parameters().sigma_F == 0.20);
  CHECK(ModelParameters{}.sigma_F == 0.20);
}

TEST_CASE("target validation") {
  CalibrationTargets t;
  t.heat_cost_ratio = 0.9;
  CHECK_THROWS_AS(t.validate(), ConfigError);
  t = {};
  t.renewable_share = 1.2;
  CHECK_THROWS_AS(t.validate(), ConfigError);
  t = {};
  CHECK_THROWS_AS(t.set("no_such_target", 1.0), ConfigError);
  t.set("renewable_share", 0.5);
  CHECK(t.renewable_share == 0.5);
}

TEST_CASE("unreachable targets raise a calibration error") {
  CalibrationTargets t;
  t.housing_exp_share = 0.001;
  try {
    calibrate(t, table1_parameters());
    FAIL("expected a calibration error");
  } catch (const CalibrationError& e) {
    CHECK(std::string(e.what()).find("housing") != std::string::npos);
  }
}

TEST_CASE("calibrated parameters are the shared fixture") {
  CHECK(calibrated_params().h_bar == calibrated().params.h_bar);
  CHECK(calibrated_params().A_N0 == doctest::Approx(0.69).epsilon(1e-8));
}
