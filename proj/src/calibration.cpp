#include "decarb/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "decarb/errors.hpp"

namespace decarb {
namespace {

using Field = double CalibrationTargets::*;

const std::vector<std::pair<std::string, Field>>& target_fields() {
  static const std::vector<std::pair<std::string, Field>> fields = {
      {"housing_exp_share", &CalibrationTargets::housing_exp_share},
      {"heat_cost_ratio", &CalibrationTargets::heat_cost_ratio},
      {"renewable_share", &CalibrationTargets::renewable_share},
      {"residential_res_share", &CalibrationTargets::residential_res_share},
      {"old_housing_share", &CalibrationTargets::old_housing_share},
      {"land_price_normalization", &CalibrationTargets::land_price_normalization},
  };
  return fields;
}

bool in_unit(double x) { return x > 0.0 && x < 1.0; }

}  // namespace

void CalibrationTargets::validate() const {
  if (!in_unit(housing_exp_share) || !in_unit(renewable_share) || !in_unit(residential_res_share) ||
      !in_unit(old_housing_share))
    throw ConfigError("calibration shares must lie in (0,1)");
  if (!(heat_cost_ratio > 1.0)) throw ConfigError("heat_cost_ratio must exceed 1");
  if (!(land_price_normalization > 0.0)) throw ConfigError("land price normalization must be positive");
}

void CalibrationTargets::set(const std::string& name, double value) {
  for (const auto& [key, field] : target_fields()) {
    if (key == name) {
      this->*field = value;
      return;
    }
  }
  throw ConfigError("unknown calibration target '" + name + "'");
}

const std::vector<std::string>& CalibrationTargets::field_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& f : target_fields()) out.push_back(f.first);
    return out;
  }();
  return names;
}

bool TargetReport::all_within() const {
  return std::none_of(rows.begin(), rows.end(), [](const TargetRow& r) { return r.flagged; });
}

const TargetRow& TargetReport::row(const std::string& name) const {
  for (const auto& r : rows)
    if (r.name == name) return r;
  throw ConfigError("no target named '" + name + "'");
}

double disposable_income(const ModelParameters& p, const SteadyState& ss) {
  const auto& a = ss.alloc;
  const auto& pr = ss.prices;
  return (pr.w * a.L + pr.R * a.K_Y + pr.R_F * a.K_F + pr.R_N * a.K_N) / p.n;
}

double housing_expenditure(const ModelParameters& p, const SteadyState& ss) {
  return p.delta_H * p.k_bar + ss.alloc.i_H + ss.land_rent + ss.prices.p_ene * ss.alloc.ene;
}

TargetReport verify_calibration(const ModelParameters& p, const SteadyState& ss,
                                const CalibrationTargets& targets, double tolerance) {
  const auto& a = ss.alloc;
  TargetReport rep;
  rep.tolerance = tolerance;
  auto add = [&](const std::string& name, double target, double model) {
    const double abs_err = std::abs(model - target);
    const double rel_err = abs_err / std::abs(target);
    rep.rows.push_back({name, target, model, abs_err, rel_err, rel_err > tolerance});
  };
  add("housing_exp_share", targets.housing_exp_share, housing_expenditure(p, ss) / disposable_income(p, ss));
  add("heat_cost_ratio", targets.heat_cost_ratio, (p.kappa_bar / a.k_E + p.kappa_N) / p.kappa_N);
  add("renewable_share", targets.renewable_share, a.E_N / (a.E_N + a.E_F));
  add("residential_res_share", targets.residential_res_share, p.n * a.res / (p.n * a.res + a.Res_F));
  add("old_housing_share", targets.old_housing_share, p.k_bar / (p.k_bar + a.k_H));
  add("land_price_normalization", targets.land_price_normalization, ss.land_price);
  return rep;
}

std::vector<PublishedCheck> compare_with_published(const ModelParameters& calibrated) {
  const ModelParameters table = table1_parameters();
  const std::pair<const char*, int> rows[] = {{"h_bar", 2}, {"kappa_bar", 3}, {"kappa_N", 2},
                                              {"A_N0", 2},  {"Land", 2},      {"k0E_ratio", 2}};
  std::vector<PublishedCheck> out;
  for (const auto& [name, decimals] : rows) {
    const double pub = table.get(name);
    const double model = calibrated.get(name);
    const double half_unit = 0.5 * std::pow(10.0, -decimals);
    out.push_back({name, pub, decimals, model, std::abs(model - pub) <= half_unit * (1.0 + 1e-12)});
  }
  return out;
}

CalibrationResult calibrate(const CalibrationTargets& targets, const ModelParameters& fixed) {
  targets.validate();
  ModelParameters p = fixed;
  const double R_F = p.rho + p.delta_F;
  const double R_N = p.rho + p.delta_N;

  // renewable share pins the relative price of clean electricity, hence A_N0
  const double p_F = ces_unit_cost(p.a_F, R_F, p.p_R, p.sigma_F);
  const double s = targets.renewable_share;
  const double p_N = p_F * (1.0 - p.a_E) / p.a_E * std::pow((1.0 - s) / s, 1.0 / p.sigma_E);
  p.A_N0 = R_N / p_N;

  const detail::StationaryPrices pr = detail::stationary_prices(p, {});
  const auto mix = detail::energy_mix_per_unit(p, pr);
  detail::IndustryQuantities unit = detail::final_good_block(p, pr);
  const double E_Y = unit.E_Y;
  unit.E_Y = 1.0;
  detail::electricity_block(p, pr, {}, 0.0, unit);  // quantities per unit of electricity
  const double res_per_E = unit.Res_F;

  // residential resource share is linear in the household energy scale
  const double sr = targets.residential_res_share;
  const double denom = p.n * (mix[1] * (1.0 - sr) - sr * res_per_E * mix[0]);
  if (!(denom > 0.0)) throw CalibrationError("residential resource share unattainable", "residential_res_share");
  const double ene = sr * res_per_E * E_Y / denom;

  detail::IndustryQuantities q = detail::final_good_block(p, pr);
  detail::electricity_block(p, pr, {}, mix[0] * ene, q);

  const double H = targets.heat_cost_ratio;
  const double o = targets.old_housing_share;
  const double X = ene / (H + (1.0 - o) / o);  // kappa_N * k_bar
  const double income = (pr.w * p.L_total + pr.R * q.K_Y + pr.R_F * q.K_F + pr.R_N * q.K_N) / p.n;
  const double land_ratio = p.a_h / (1.0 - p.a_h);
  const double numer =
      targets.housing_exp_share * income - pr.p_ene * ene - land_ratio * pr.p_ene * X / o;
  const double coef = (p.delta_H + land_ratio * (p.rho + p.delta_H)) / o;
  if (!(numer > 0.0)) throw CalibrationError("housing expenditure share too small for energy spending", "housing_exp_share");
  p.k_bar = numer / coef;
  p.kappa_N = X / p.k_bar;
  const double k_H = p.k_bar * (1.0 - o) / o;
  const double k_E = pr.p_ene * (H - 1.0) * X / (p.rho + p.delta_E);
  p.kappa_bar = (H - 1.0) * p.kappa_N * k_E;
  p.k0E_ratio = k_E / p.k_bar;

  // land rent from the housing-capital condition, land from its price
  const double rent = land_ratio * (p.rho + p.delta_H + pr.p_ene * p.kappa_N) * (p.k_bar + k_H);
  const double land = rent / (p.rho * targets.land_price_normalization);
  p.Land = p.n * land;
  const double h = std::pow(land, p.a_h) * std::pow(p.k_bar + k_H, 1.0 - p.a_h);
  const double c = (q.Y - p.p_R * (p.n * mix[1] * ene + q.Res_F) - p.delta_Y * q.K_Y - p.delta_F * q.K_F -
                    p.delta_N * q.K_N) / p.n -
                   p.delta_H * (p.k_bar + k_H) - p.delta_E * k_E;
  if (!(c > 0.0)) throw CalibrationError("calibrated consumption is not positive", "housing_exp_share");
  p.h_bar = h - (1.0 - p.phi) * c * p.a_h * h / (p.phi * rent);
  if (!(p.h_bar >= 0.0)) throw CalibrationError("implied subsistence level is negative", "land_price_normalization");

  CalibrationResult out;
  out.params = p;
  try {
    out.steady_state = solve_steady_state(p);
  } catch (const std::exception& e) {
    throw CalibrationError(std::string("steady state of calibrated parameters failed: ") + e.what());
  }
  out.report = verify_calibration(p, out.steady_state, targets, 1e-8);
  if (!out.report.all_within()) {
    const auto worst = std::max_element(out.report.rows.begin(), out.report.rows.end(),
                                        [](const TargetRow& a, const TargetRow& b) { return a.rel_error < b.rel_error; });
    throw CalibrationError("calibrated steady state misses target " + worst->name, worst->name);
  }
  return out;
}

}  // namespace decarb
