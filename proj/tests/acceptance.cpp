// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "decarb/calibration.hpp"
#include "decarb/pipeline.hpp"
#include "decarb/reporting.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace decarb;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, const char* title, bool pass, const std::string& detail) {
  std::printf("%s  %d  %-34s %s\n", pass ? "PASS" : "FAIL", id, title, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void calibration_round_trip() {
  const auto t0 = Clock::now();
  const CalibrationResult cal = calibrate(CalibrationTargets{}, table1_parameters());
  const double secs = seconds_since(t0);
  std::string misses;
  bool all = true;
  for (const auto& c : compare_with_published(cal.params)) {
    if (c.within_rounding) continue;
    all = false;
    misses += fmt(" %s=%.4g(%.*f)", c.name.c_str(), c.model, c.decimals, c.published);
  }
  const bool pass = all && cal.report.all_within() && secs < 10.0;
  report(1, "calibration round-trip", pass,
         fmt("%.2fs;", secs) + (all ? std::string(" all six within print rounding") : " outside rounding:" + misses));
}

void steady_state_identities(const PipelineResult& pr) {
  const CalibrationResult& cal = *pr.calibration;
  const SteadyState& ss = cal.steady_state;
  const double dR = std::abs(ss.prices.R - 0.12);
  const double dF = std::abs(ss.prices.R_F - ss.prices.R);
  const double dN = std::abs(ss.prices.R_N - ss.prices.R);
  double worst_share = 0.0;
  for (const char* name : {"housing_exp_share", "renewable_share", "residential_res_share", "old_housing_share"}) {
    const TargetRow& row = cal.report.row(name);
    worst_share = std::max(worst_share, std::abs(row.model - row.target));
  }
  const bool pass = dR <= 1e-10 && dF <= 1e-10 && dN <= 1e-10 && worst_share <= 1e-8;
  report(2, "steady-state identities", pass,
         fmt("|R-0.12|=%.1e |R_F-R|=%.1e |R_N-R|=%.1e max share error=%.1e", dR, dF, dN, worst_share));
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

double central(const std::function<double(double)>& f, double x) {
  const double h = 1e-6 * std::max(1.0, std::abs(x));
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

void gradient_suite() {
  std::mt19937 rng(20240601);
  std::uniform_real_distribution<double> pos(0.1, 5.0), share(0.05, 0.95), sig(0.2, 4.0), slack(0.05, 4.0);
  const ModelParameters p = testing::calibrated_params();
  int checks = 0, bad = 0;
  double worst = 0.0;
  auto check = [&](double analytic, double numeric) {
    const double e = rel_err(analytic, numeric);
    worst = std::max(worst, e);
    ++checks;
    if (!(e < 1e-6)) ++bad;
  };
  for (int i = 0; i < 100; ++i) {
    const double s = share(rng), x1 = pos(rng), x2 = pos(rng);
    double sigma = sig(rng);
    if (std::abs(sigma - 1.0) < 0.05) sigma += 0.1;
    const CesValue v = ces_with_gradient(s, x1, x2, sigma);
    check(v.d_x1, central([&](double z) { return ces(s, z, x2, sigma); }, x1));
    check(v.d_x2, central([&](double z) { return ces(s, x1, z, sigma); }, x2));

    ModelParameters q = p;
    q.eta = (i % 2 == 0) ? 1.0 : 0.5 + pos(rng);
    const double c = pos(rng), h = q.h_bar + slack(rng);
    const UtilityValue u = utility(c, h, q);
    check(u.u_c, central([&](double z) { return utility(z, h, q).u; }, c));
    check(u.u_h, central([&](double z) { return utility(c, z, q).u; }, h));
    const UtilityHessian H = utility_hessian(c, h, q);
    check(H.u_cc, central([&](double z) { return utility(z, h, q).u_c; }, c));
    check(H.u_ch, central([&](double z) { return utility(c, z, q).u_c; }, h));
    check(H.u_hh, central([&](double z) { return utility(c, z, q).u_h; }, h));

    const double land = pos(rng), kH = pos(rng), kE = pos(rng);
    const HousingValue hv = housing_services(land, kH, p);
    check(hv.d_land, central([&](double z) { return housing_services(z, kH, p).h; }, land));
    check(hv.d_kH, central([&](double z) { return housing_services(land, z, p).h; }, kH));
    const EnergyRequirement er = housing_energy_requirement(kE, kH, p);
    check(er.d_kE, central([&](double z) { return housing_energy_requirement(z, kH, p).ene; }, kE));
    check(er.d_kH, central([&](double z) { return housing_energy_requirement(kE, z, p).ene; }, kH));

    const double pE = pos(rng), pres = pos(rng);
    const CompositePrice cp = composite_energy_price(pE, pres, p);
    check(cp.d_pE, central([&](double z) { return composite_energy_price(z, pres, p).price; }, pE));
    check(cp.d_pres, central([&](double z) { return composite_energy_price(pE, z, p).price; }, pres));

    const ProductionInputs in{pos(rng), pos(rng), pos(rng), pos(rng), pos(rng), pos(rng)};
    const double AY = pos(rng), AN = pos(rng);
    const ProductionBlock pb = production_block(in, AY, AN, p);
    auto Y = [&](double ProductionInputs::*field) {
      return [&, field](double z) {
        ProductionInputs y = in;
        y.*field = z;
        return production_block(y, AY, AN, p).Y;
      };
    };
    check(pb.dY_dKY, central(Y(&ProductionInputs::K_Y), in.K_Y));
    check(pb.dY_dL, central(Y(&ProductionInputs::L), in.L));
    check(pb.dY_dEY, central(Y(&ProductionInputs::E_Y), in.E_Y));
    check(pb.dEF_dKF, central([&](double z) { return ces(p.a_F, z, in.Res_F, p.sigma_F); }, in.K_F));
    check(pb.dEF_dRes, central([&](double z) { return ces(p.a_F, in.K_F, z, p.sigma_F); }, in.Res_F));
    check(pb.dE_dEF, central([&](double z) { return ces(p.a_E, z, pb.E_N, p.sigma_E); }, pb.E_F));
    check(pb.dE_dEN, central([&](double z) { return ces(p.a_E, pb.E_F, z, p.sigma_E); }, pb.E_N));
    check(pb.dEN_dKN, central([&](double z) { return AN * z; }, in.K_N));
  }

  // Jacobian of the transition system on a short path away from the stationary point
  TransitionProblem pb = testing::small_problem(8, {0.95, 0.9, 1.05, 0.97, 0.98});
  SolverOptions o;
  o.check_jacobian = true;
  const TransitionResult r =
      solve_transition(pb, o, replicate_steady_state(pb, solve_steady_state(pb.params)));
  const double jac = r.diagnostics.jacobian_fd_error;
  const bool pass = bad == 0 && jac >= 0.0 && jac < 1e-6;
  report(3, "gradient suite", pass,
         fmt("%d derivative checks at 100 points, %d above 1e-6 (worst %.1e); transition Jacobian %.1e", checks, bad,
             worst, jac));
}

void small_horizon_oracle() {
  const oracle::ThreePeriodComparison r = oracle::three_period_comparison();
  const bool pass = r.max_rel_error < 1e-5 && r.max_investment_error < 1e-5 && r.seconds < 60.0;
  report(4, "three-period oracle", pass,
         fmt("max allocation gap %.1e, investment gap %.1e, irreversibility %s, %.2fs", r.max_rel_error,
             r.max_investment_error, r.irreversibility_binds ? "binding" : "slack", r.seconds));
}

std::string ranges(const std::vector<std::pair<int, int>>& rs) {
  if (rs.empty()) return "none";
  std::string s;
  for (const auto& [a, b] : rs) s += (s.empty() ? "" : ",") + std::to_string(a) + "-" + std::to_string(b);
  return s;
}

void first_best_structure(const PipelineResult& pr) {
  const ScenarioResult& fb = *pr.find("first-best");
  const Trajectory& tr = fb.trajectory;
  const double p_R = fb.problem.params.p_R, rho = fb.problem.params.rho;
  double tau_gap = 0.0, growth_gap = 0.0, phi_E = 0.0;
  for (int t = 0; t < tr.periods; ++t) {
    tau_gap = std::max(tau_gap, std::abs(tr.p_C[t] - tr.p_HC[t]) / p_R);
    phi_E = std::max(phi_E, tr.multipliers[t].phi_E / tr.multipliers[t].lambda);
  }
  int pre = 0;
  for (int t = 0; t + 1 < tr.periods && tr.M[t + 1] > 1e-9 * fb.M0; ++t, ++pre)
    growth_gap = std::max(growth_gap, std::abs(tr.multipliers[t + 1].mu_R / tr.multipliers[t].mu_R - 1.0 - rho));
  const auto& bh = fb.diagnostics.binding_H;
  const bool housing_waits = tr.multipliers[0].phi_H > 0.0 && !bh.empty() && bh.front().first == 0;
  const bool pass = tau_gap <= 1e-8 && pre > 0 && growth_gap <= 1e-6 && housing_waits && phi_E <= 1e-9;
  report(5, "first-best structure", pass,
         fmt("|tau_Y-tau_H|=%.1e; mu_R growth-rho=%.1e over %d periods; i_H=0 on %s; max phi_E/lambda=%.2e "
             "(binding %s)",
             tau_gap, growth_gap, pre, ranges(bh).c_str(), phi_E, ranges(fb.diagnostics.binding_E).c_str()));
}

void hygiene(const PipelineResult& pr) {
  bool pass = true;
  double mc = 0, gov = 0, comp = 0, walras = 0, slack = 0;
  for (const auto& r : pr.results) {
    const Diagnostics& d = r.diagnostics;
    if (!d.converged) continue;
    mc = std::max(mc, d.market_clearing_max);
    gov = std::max(gov, d.government_budget_max);
    comp = std::max(comp, d.complementarity_max);
    walras = std::max(walras, d.walras_max);
    slack = std::max(slack, d.budget_slack_max);
    pass = pass && d.polished;
  }
  bool all_converged = true;
  for (const auto& r : pr.results) all_converged = all_converged && r.diagnostics.converged;
  pass = pass && all_converged && mc < 1e-9 && gov < 1e-9 && comp < 1e-8 && walras < 1e-9 && slack < 1e-8;
  report(6, "equilibrium hygiene", pass,
         fmt("%zu scenarios; market %.1e, government %.1e, |i*phi| %.1e, budget %.1e, Walras %.1e", pr.results.size(),
             mc, gov, comp, slack, walras));
}

void table_signs(const ComparisonReport& rep) {
  const ComparisonRow& fb = rep.rows[0];
  const ComparisonRow& ph = rep.rows[1];
  const ComparisonRow& sub = rep.rows[2];
  std::string failed;
  auto need = [&](bool ok, const char* what) {
    if (!ok) failed += std::string(failed.empty() ? "" : ", ") + what;
  };
  need(fb.welfare >= ph.welfare && ph.welfare >= sub.welfare, "welfare ordering");
  need(fb.welfare < 0 && ph.welfare < 0 && sub.welfare < 0, "welfare below no-policy");
  need(fb.energy_costs > 0 && ph.energy_costs > 0, "energy costs up with carbon prices");
  need(sub.energy_costs < 0, "energy costs down with subsidy");
  need(fb.transfers_share > 0 && ph.transfers_share > 0, "transfers positive with carbon prices");
  need(sub.transfers_share < 0, "transfers negative with subsidy");
  need(fb.output < 0 && ph.output < 0 && sub.output < 0, "output down");
  need(fb.energy_production > 0 && ph.energy_production > 0 && sub.energy_production > 0, "energy production up");
  need(sub.energy_production < fb.energy_production && sub.energy_production < ph.energy_production,
       "subsidy smallest energy production");
  std::string values;
  for (const char* m : {"Welfare", "Energy Costs", "Transfers", "Output", "Energy Production"})
    values += fmt(" %s %+.4f/%+.4f/%+.4f;", m, ComparisonReport::metric(fb, m), ComparisonReport::metric(ph, m),
                  ComparisonReport::metric(sub, m));
  report(7, "Table 2 signs and orderings", failed.empty(),
         "fb/ph/sub:" + values + (failed.empty() ? "" : " violated: " + failed));
}

std::vector<int> local_maxima(const std::vector<double>& v, int lo, int hi) {
  std::vector<int> out;
  for (int t = std::max(lo, 0); t <= hi && t < static_cast<int>(v.size()); ++t) {
    const bool left = t == 0 || v[t] > v[t - 1];
    const bool right = t + 1 >= static_cast<int>(v.size()) || v[t] >= v[t + 1];
    if (left && right && v[t] > 0.0) out.push_back(t);
  }
  return out;
}

void qualitative_dynamics(const PipelineResult& pr, const ScenarioConfig& cfg) {
  const int H = cfg.report_horizon;
  const ScenarioResult& np = *pr.find("no-policy");
  const ScenarioResult& fb = *pr.find("first-best");
  const ScenarioResult& ph = *pr.find("phased-in");
  const ScenarioResult& sub = *pr.find("subsidy");

  double peak = 0.0;
  int peak_t = 0;
  for (int t = 0; t < H; ++t) {
    const auto& a = np.trajectory.alloc[t];
    const double ratio = a.i_H / (a.i_Y + a.i_F + a.i_N);
    if (ratio > peak) peak = ratio, peak_t = t;
  }
  const bool ratio_ok = peak >= 0.05 && peak <= 0.2;

  const double multiple = sub.trajectory.alloc[0].i_E / fb.trajectory.alloc[0].i_E;
  const bool subsidy_ok = multiple >= 3.0;

  std::vector<double> iE;
  for (const auto& a : ph.trajectory.alloc) iE.push_back(a.i_E);
  const auto maxima = local_maxima(iE, -2, cfg.cap_window + 2);
  const bool waves_ok = maxima.size() >= 2;

  const auto eeg_np = eeg_path(np.trajectory, np.problem.params);
  bool np_rising = true;
  for (int t = 0; t + 1 < H; ++t) np_rising = np_rising && eeg_np[t + 1] > eeg_np[t];
  int first_violation = -1;
  std::string who;
  for (const ScenarioResult* r : {&fb, &ph, &sub}) {
    const auto e = eeg_path(r->trajectory, r->problem.params);
    for (int t = 5; t < H; ++t) {
      if (e[t] < eeg_np[t]) continue;
      if (first_violation < 0 || t < first_violation) first_violation = t, who = r->name;
      break;
    }
  }
  double min_ratio = 1e300;
  for (const auto& r : pr.results) {
    const auto raw = intensity_ratio(r.trajectory, r.problem.params);
    min_ratio = std::min(min_ratio, *std::min_element(raw.begin(), raw.begin() + H));
  }
  const bool eeg_ok = np_rising && first_violation < 0 && min_ratio > 1.0;

  std::string maxima_text;
  for (int t : maxima) maxima_text += (maxima_text.empty() ? "" : ",") + std::to_string(t);
  const std::string eeg_text =
      first_violation < 0 ? std::string("policy EEG below no-policy after t=5")
                          : fmt("EEG(%s) >= EEG(no-policy) from t=%d", who.c_str(), first_violation);
  report(8, "qualitative dynamics", ratio_ok && subsidy_ok && waves_ok && eeg_ok,
         fmt("peak i_H/i_ind %.3f at t=%d [%s]; subsidy i_E(0) %.1fx first best [%s]; phased-in i_E maxima in "
             "window at t=%s [%s]; no-policy EEG %s, %s, min old/new ratio %.3f [%s]",
             peak, peak_t, ratio_ok ? "ok" : "fail", multiple, subsidy_ok ? "ok" : "fail",
             maxima_text.empty() ? "none" : maxima_text.c_str(), waves_ok ? "ok" : "fail",
             np_rising ? "rising" : "not rising", eeg_text.c_str(), min_ratio, eeg_ok ? "ok" : "fail"));
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void determinism(const PipelineResult& first, const RunConfig& cfg) {
  const fs::path root = fs::temp_directory_path() / "decarb_acceptance";
  fs::remove_all(root);
  ExportOptions opt;
  opt.resolved_config = cfg.to_text();
  export_results(first.pointers(), (root / "a").string(), opt);
  const PipelineResult second = run_pipeline(cfg, cfg.scenarios);
  export_results(second.pointers(), (root / "b").string(), opt);
  int files = 0, differ = 0;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    if (entry.path().extension() != ".csv") continue;
    ++files;
    if (slurp(entry.path()) != slurp(root / "b" / entry.path().filename())) ++differ;
  }
  fs::remove_all(root);
  report(9, "determinism", files > 0 && differ == 0, fmt("%d CSV files compared, %d differ", files, differ));
}

}  // namespace

int main() {
  try {
    calibration_round_trip();
    const RunConfig cfg;
    const auto t0 = Clock::now();
    const PipelineResult pr = run_pipeline(cfg, cfg.scenarios);
    const double pipeline_seconds = seconds_since(t0);
    steady_state_identities(pr);
    gradient_suite();
    small_horizon_oracle();
    first_best_structure(pr);
    hygiene(pr);
    const ComparisonReport rep = compare(*pr.find("no-policy"),
                                         {pr.find("first-best"), pr.find("phased-in"), pr.find("subsidy")},
                                         cfg.scenario.report_horizon);
    table_signs(rep);
    qualitative_dynamics(pr, cfg.scenario);
    determinism(pr, cfg);
    std::printf("%d of 9 criteria failed; full pipeline %.1fs\n", failures, pipeline_seconds);
  } catch (const std::exception& e) {
    std::printf("FAIL  acceptance run aborted: %s\n", e.what());
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
