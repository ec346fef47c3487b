#include "decarb/reporting.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "decarb/errors.hpp"

namespace decarb {
namespace {

void check_horizon(const Trajectory& traj, int horizon) {
  if (horizon < 1 || horizon > traj.periods) throw ConfigError("reporting horizon outside the trajectory");
}

double relative(double s, double b) { return (s - b) / std::abs(b); }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + '"';
}

nlohmann::json ranges_json(const std::vector<std::pair<int, int>>& ranges) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& [x, y] : ranges) a.push_back({x, y});
  return a;
}

std::string sector_name(Sector s) {
  switch (s) {
    case Sector::Industry: return "industry";
    case Sector::Housing: return "housing";
    default: return "total";
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto r = std::from_chars(first, last, v);
  if (r.ec != std::errc() || r.ptr != last) throw IoError("not a number: '" + s + "'");
  return v;
}

double discounted_welfare(const Trajectory& traj, const ModelParameters& p, int horizon) {
  check_horizon(traj, horizon);
  double W = 0.0, disc = 1.0;
  for (int t = 0; t < horizon; ++t) {
    W += disc * utility(traj.alloc[t].c, traj.alloc[t].h, p).u;
    disc *= p.beta();
  }
  return W;
}

double consumption_equivalent(const Trajectory& scenario, const Trajectory& baseline, const ModelParameters& p,
                              int horizon) {
  check_horizon(baseline, horizon);
  const double target = discounted_welfare(scenario, p, horizon);
  auto gap = [&](double log_scale) {
    const double s = std::exp(log_scale);
    double W = 0.0, disc = 1.0;
    for (int t = 0; t < horizon; ++t) {
      W += disc * utility(s * baseline.alloc[t].c, baseline.alloc[t].h, p).u;
      disc *= p.beta();
    }
    return W - target;
  };
  double lo = -0.1, hi = 0.1;
  while (gap(lo) > 0.0) lo *= 2.0;
  while (gap(hi) < 0.0) hi *= 2.0;
  std::uintmax_t iters = 200;
  const auto root = boost::math::tools::toms748_solve(gap, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
  return std::exp(0.5 * (root.first + root.second)) - 1.0;
}

double imputed_land_rent(const Trajectory& traj, const ModelParameters& p, int t) {
  const auto& m = traj.multipliers[t];
  return m.chi / m.lambda * p.a_h * traj.alloc[t].h;
}

CostTotals cost_totals(const Trajectory& traj, const ModelParameters& p, int horizon) {
  check_horizon(traj, horizon);
  CostTotals c;
  double disc = 1.0;
  for (int t = 0; t < horizon; ++t) {
    const auto& a = traj.alloc[t];
    const auto& pr = traj.prices[t];
    const double energy = pr.p_E * a.e + (p.p_R + traj.p_HC[t]) * a.res;
    const double housing = a.i_H + p.delta_H * p.k_bar + imputed_land_rent(traj, p, t);
    const double factor = (pr.w * a.L + pr.R * a.K_Y + pr.R_F * a.K_F + pr.R_N * a.K_N) / p.n;
    c.welfare += disc * utility(a.c, a.h, p).u;
    c.energy_costs += disc * energy;
    c.net_housing_costs += disc * housing;
    c.gross_housing_costs += disc * (housing + energy);
    c.disposable_income += disc * (factor + traj.Gamma[t]);
    const double housing_side = traj.p_HC[t] * a.res - traj.tau_E[t] * a.i_E - traj.tau_H[t] * a.i_H;
    c.transfers += disc * traj.Gamma[t];
    c.housing_transfers += disc * housing_side;
    c.income_net_of_transfers += disc * (factor + traj.Gamma[t] - housing_side);
    c.output += disc * a.Y;
    c.energy_production += disc * a.E;
    disc *= p.beta();
  }
  return c;
}

ComparisonRow cost_metrics(const Trajectory& traj, const Trajectory& baseline, const ModelParameters& p,
                           int horizon, const std::string& name) {
  check_horizon(traj, horizon);
  check_horizon(baseline, horizon);
  const CostTotals s = cost_totals(traj, p, horizon);
  const CostTotals b = cost_totals(baseline, p, horizon);
  ComparisonRow r;
  r.scenario = name;
  r.welfare = relative(s.welfare, b.welfare);
  r.welfare_cev = consumption_equivalent(traj, baseline, p, horizon);
  r.energy_costs = relative(s.energy_costs, b.energy_costs);
  r.net_housing_costs = relative(s.net_housing_costs, b.net_housing_costs);
  r.gross_housing_costs = relative(s.gross_housing_costs, b.gross_housing_costs);
  r.disposable_income = relative(s.disposable_income, b.disposable_income);
  r.transfers_share = s.housing_transfers / s.income_net_of_transfers;
  r.output = relative(s.output, b.output);
  r.energy_production = relative(s.energy_production, b.energy_production);
  return r;
}

const std::vector<std::string>& ComparisonReport::metric_names() {
  static const std::vector<std::string> names = {
      "Welfare",         "Energy Costs", "Housing Costs (net)", "Housing Costs (gross)",
      "Disp. Income",    "Transfers",    "Output",              "Energy Production"};
  return names;
}

double ComparisonReport::metric(const ComparisonRow& row, const std::string& name) {
  if (name == "Welfare") return row.welfare;
  if (name == "Welfare (CEV)") return row.welfare_cev;
  if (name == "Energy Costs") return row.energy_costs;
  if (name == "Housing Costs (net)") return row.net_housing_costs;
  if (name == "Housing Costs (gross)") return row.gross_housing_costs;
  if (name == "Disp. Income") return row.disposable_income;
  if (name == "Transfers") return row.transfers_share;
  if (name == "Output") return row.output;
  if (name == "Energy Production") return row.energy_production;
  throw ConfigError("unknown metric '" + name + "'");
}

ComparisonReport compare(const ScenarioResult& baseline, const std::vector<const ScenarioResult*>& scenarios,
                         int horizon) {
  ComparisonReport rep;
  rep.horizon = horizon;
  const ModelParameters& p = baseline.problem.params;
  rep.eeg_names.push_back(baseline.name);
  rep.eeg.push_back(eeg_path(baseline.trajectory, p));
  for (const ScenarioResult* s : scenarios) {
    if (s->trajectory.periods != baseline.trajectory.periods)
      throw ConfigError("scenario '" + s->name + "' has a different horizon than the baseline");
    rep.rows.push_back(cost_metrics(s->trajectory, baseline.trajectory, p, horizon, s->name));
    rep.eeg_names.push_back(s->name);
    rep.eeg.push_back(eeg_path(s->trajectory, p));
  }
  return rep;
}

std::vector<double> intensity_ratio(const Trajectory& traj, const ModelParameters& p) {
  std::vector<double> r(traj.periods);
  for (int t = 0; t < traj.periods; ++t) {
    const double kE = traj.alloc[t].k_E;
    if (!(kE > 0.0)) throw DomainError("efficiency capital must be positive", t);
    r[t] = (p.kappa_N + p.kappa_bar / kE) / p.kappa_N;
  }
  return r;
}

std::vector<double> eeg_path(const Trajectory& traj, const ModelParameters& p) {
  std::vector<double> r = intensity_ratio(traj, p);
  const double r0 = r.front();
  for (double& v : r) v /= r0;
  return r;
}

const std::vector<std::pair<std::string, std::string>>& data_dictionary() {
  static const std::vector<std::pair<std::string, std::string>> dict = {
      {"t", "period index"},
      {"c", "consumption per household"},
      {"h", "housing services per household"},
      {"ene", "household energy requirement"},
      {"e", "household electricity"},
      {"res", "household fossil resource use"},
      {"i_Y", "final-good capital investment per household"},
      {"i_F", "fossil electricity capital investment per household"},
      {"i_N", "renewable electricity capital investment per household"},
      {"i_H", "housing capital investment per household"},
      {"i_E", "efficiency capital investment per household"},
      {"k_H", "housing capital per household, beginning of period"},
      {"k_E", "efficiency capital per household, beginning of period"},
      {"K_Y", "aggregate final-good capital"},
      {"K_F", "aggregate fossil electricity capital"},
      {"K_N", "aggregate renewable electricity capital"},
      {"Y", "final output"},
      {"Z", "capital-labor composite"},
      {"E", "total electricity"},
      {"E_Y", "electricity used in final-good production"},
      {"E_F", "fossil electricity"},
      {"E_N", "renewable electricity"},
      {"Res_F", "fossil resource used by electricity producers"},
      {"p_E", "electricity price"},
      {"p_F", "fossil electricity price"},
      {"p_N", "renewable electricity price"},
      {"p_ene", "household energy composite price"},
      {"R", "rental rate of final-good capital"},
      {"R_F", "rental rate of fossil electricity capital"},
      {"R_N", "rental rate of renewable electricity capital"},
      {"w", "wage"},
      {"lambda", "marginal utility of consumption"},
      {"chi", "marginal utility of housing services"},
      {"phi_H", "housing irreversibility multiplier, utility units"},
      {"phi_E", "efficiency irreversibility multiplier, utility units"},
      {"mu_R", "budget shadow value, current utility units"},
      {"mu", "budget non-negativity multiplier"},
      {"p_C", "industry carbon price"},
      {"p_HC", "housing carbon price"},
      {"tau_C", "carbon tax rate p_C/p_R"},
      {"tau_E", "retrofit subsidy rate"},
      {"tau_H", "housing capital subsidy rate"},
      {"Gamma", "lump-sum transfer per household"},
      {"emissions_industry", "fossil resource use of electricity producers"},
      {"emissions_housing", "fossil resource use of all households"},
      {"M", "remaining window budget at the start of the period"},
      {"utility", "period utility"},
      {"land_rent", "imputed land rent per household"},
      {"intensity_ratio", "old-to-new building energy intensity"},
      {"eeg", "energy efficiency gap normalized to t = 0"},
  };
  return dict;
}

const std::vector<std::string>& trajectory_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c;
    for (const auto& d : data_dictionary()) c.push_back(d.first);
    return c;
  }();
  return cols;
}

std::vector<double> trajectory_row(const Trajectory& traj, const ModelParameters& p, int t) {
  const auto& a = traj.alloc[t];
  const auto& pr = traj.prices[t];
  const auto& m = traj.multipliers[t];
  const double ratio = (p.kappa_N + p.kappa_bar / a.k_E) / p.kappa_N;
  const double ratio0 = (p.kappa_N + p.kappa_bar / traj.alloc[0].k_E) / p.kappa_N;
  return {static_cast<double>(t),
          a.c, a.h, a.ene, a.e, a.res,
          a.i_Y, a.i_F, a.i_N, a.i_H, a.i_E,
          a.k_H, a.k_E, a.K_Y, a.K_F, a.K_N,
          a.Y, a.Z, a.E, a.E_Y, a.E_F, a.E_N, a.Res_F,
          pr.p_E, pr.p_F, pr.p_N, pr.p_ene, pr.R, pr.R_F, pr.R_N, pr.w,
          m.lambda, m.chi, m.phi_H, m.phi_E, m.mu_R, m.mu,
          traj.p_C[t], traj.p_HC[t], traj.p_C[t] / p.p_R, traj.tau_E[t], traj.tau_H[t], traj.Gamma[t],
          traj.emissions_industry[t], traj.emissions_housing[t], traj.M[t], traj.welfare_flow[t],
          imputed_land_rent(traj, p, t), ratio, ratio / ratio0};
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj, const ModelParameters& p) {
  std::string out;
  const auto& cols = trajectory_columns();
  for (size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + csv_field(cols[i]);
  out += "\r\n";
  for (int t = 0; t < traj.periods; ++t) {
    const auto row = trajectory_row(traj, p, t);
    for (size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_double(row[i]);
    out += "\r\n";
  }
  write_file(path, out);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false, any = false;
  for (size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
      continue;
    }
    if (ch == '"') {
      quoted = true;
      any = true;
    } else if (ch == ',') {
      rec.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (ch == '\r' || ch == '\n') {
      if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      rec.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(rec));
      rec.clear();
      any = false;
    } else {
      field += ch;
      any = true;
    }
  }
  if (quoted) throw IoError("unterminated quoted field in '" + path + "'");
  if (any) {
    rec.push_back(std::move(field));
    records.push_back(std::move(rec));
  }
  if (records.empty()) throw IoError("empty CSV '" + path + "'");
  CsvTable t;
  t.header = std::move(records.front());
  for (size_t i = 1; i < records.size(); ++i) {
    if (records[i].size() != t.header.size())
      throw IoError("CSV row " + std::to_string(i) + " has " + std::to_string(records[i].size()) + " fields");
    t.rows.push_back(std::move(records[i]));
  }
  return t;
}

Trajectory trajectory_from_csv(const CsvTable& table, const ModelParameters& p) {
  if (table.header != trajectory_columns()) throw IoError("CSV header does not match the trajectory layout");
  Trajectory tr;
  tr.periods = static_cast<int>(table.rows.size());
  for (const auto& row : table.rows) {
    std::vector<double> v;
    v.reserve(row.size());
    for (const auto& f : row) v.push_back(parse_double(f));
    size_t i = 1;
    auto next = [&] { return v[i++]; };
    PeriodAllocation a;
    a.c = next(); a.h = next(); a.ene = next(); a.e = next(); a.res = next();
    a.i_Y = next(); a.i_F = next(); a.i_N = next(); a.i_H = next(); a.i_E = next();
    a.k_H = next(); a.k_E = next(); a.K_Y = next(); a.K_F = next(); a.K_N = next();
    a.Y = next(); a.Z = next(); a.E = next(); a.E_Y = next(); a.E_F = next(); a.E_N = next(); a.Res_F = next();
    a.k_Y = a.K_Y / p.n;
    a.k_F = a.K_F / p.n;
    a.k_N = a.K_N / p.n;
    a.L = p.L_total;
    a.land = p.land_per_household();
    PriceSystem pr;
    pr.p_E = next(); pr.p_F = next(); pr.p_N = next(); pr.p_ene = next();
    pr.R = next(); pr.R_F = next(); pr.R_N = next(); pr.w = next();
    MultiplierSet m;
    m.lambda = next(); m.chi = next(); m.phi_H = next(); m.phi_E = next(); m.mu_R = next(); m.mu = next();
    tr.alloc.push_back(a);
    tr.prices.push_back(pr);
    tr.multipliers.push_back(m);
    tr.p_C.push_back(next());
    tr.p_HC.push_back(next());
    ++i;  // tau_C is derived
    tr.tau_E.push_back(next());
    tr.tau_H.push_back(next());
    tr.Gamma.push_back(next());
    tr.emissions_industry.push_back(next());
    tr.emissions_housing.push_back(next());
    tr.M.push_back(next());
    tr.welfare_flow.push_back(next());
  }
  return tr;
}

std::string comparison_tsv(const ComparisonReport& report) {
  std::string out = "metric";
  for (const auto& r : report.rows) out += "\t" + r.scenario;
  out += "\n";
  for (const auto& m : ComparisonReport::metric_names()) {
    out += m;
    for (const auto& r : report.rows) out += "\t" + format_double(ComparisonReport::metric(r, m));
    out += "\n";
  }
  return out;
}

std::string comparison_text(const ComparisonReport& report) {
  std::ostringstream os;
  os << "Changes relative to the no-policy baseline, discounted at beta over " << report.horizon
     << " periods (Transfers: share of income net of transfers)\n";
  os << std::left << std::setw(24) << "";
  for (const auto& r : report.rows) os << std::right << std::setw(14) << r.scenario;
  os << "\n";
  for (const auto& m : ComparisonReport::metric_names()) {
    os << std::left << std::setw(24) << m;
    for (const auto& r : report.rows)
      os << std::right << std::setw(14) << std::fixed << std::setprecision(4) << ComparisonReport::metric(r, m);
    os << "\n";
  }
  os << std::left << std::setw(24) << "Welfare (CEV)";
  for (const auto& r : report.rows) os << std::right << std::setw(14) << std::fixed << std::setprecision(4) << r.welfare_cev;
  os << "\n";
  return os.str();
}

std::string scenario_manifest(const ScenarioResult& r, const ExportOptions& options) {
  nlohmann::ordered_json j;
  const Diagnostics& d = r.diagnostics;
  j["scenario"] = r.name;
  j["code_version"] = options.code_version;
  j["periods"] = r.trajectory.periods;
  j["budget_rule"] = to_string(r.rule);
  j["budget_window"] = r.window;
  j["M0"] = std::isfinite(r.M0) ? nlohmann::ordered_json(r.M0) : nlohmann::ordered_json(nullptr);
  nlohmann::ordered_json budgets = nlohmann::ordered_json::array();
  for (const auto& b : r.problem.policy.budgets) {
    budgets.push_back({{"name", b.name},
                       {"sector", sector_name(b.sector)},
                       {"budget", b.budget},
                       {"sum_window", {b.sum_begin, b.sum_end}},
                       {"instrument", b.instrument == BudgetInstrument::CarbonPrice ? "carbon_price" : "retrofit_subsidy"},
                       {"instrument_window", {b.start, b.end}}});
  }
  j["budgets"] = budgets;
  if (r.budgets) j["budget_split"] = {{"industry", r.budgets->industry}, {"housing", r.budgets->housing}};
  j["cumulative_emissions"] = {{"industry", r.cumulative_industry}, {"housing", r.cumulative_housing}};
  j["solver"] = {{"converged", d.converged},
                 {"iterations", d.iterations},
                 {"final_norm", d.final_norm},
                 {"eps_final", d.eps_final},
                 {"polished", d.polished}};
  j["checks"] = {{"complementarity_max", d.complementarity_max},
                 {"budget_slack_max", d.budget_slack_max},
                 {"market_clearing_max", d.market_clearing_max},
                 {"government_budget_max", d.government_budget_max},
                 {"walras_max", d.walras_max}};
  j["binding_irreversibility"] = {{"housing", ranges_json(d.binding_H)}, {"efficiency", ranges_json(d.binding_E)}};
  if (r.subsidy) {
    const SubsidyBasis& s = *r.subsidy;
    j["subsidy_basis"] = {{"form", "tau_E(t) = level * exp(-decay t) * clamp(length - t, 0, 1)"},
                          {"level", s.level},
                          {"decay", s.decay},
                          {"length", s.length},
                          {"objective", s.objective},
                          {"evaluations", s.evaluations},
                          {"failed_evaluations", s.failed_evaluations}};
  }
  if (!r.problem.policy.cap_HC.empty())
    j["housing_price_cap"] = {{"periods", r.problem.policy.cap_HC.size()}, {"level", r.problem.policy.cap_HC.front()}};
  j["wall_seconds"] = r.wall_seconds;
  return j.dump(2) + "\n";
}

void export_results(const std::vector<const ScenarioResult*>& results, const std::string& destination,
                    const ExportOptions& options) {
  if (results.empty()) throw ConfigError("nothing to export: empty result set");
  namespace fs = std::filesystem;
  const fs::path dir(destination);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + destination + "'");

  const ScenarioResult* baseline = nullptr;
  std::vector<const ScenarioResult*> policies;
  for (const ScenarioResult* r : results) {
    if (r->name == "no-policy") baseline = r;
    else policies.push_back(r);
  }
  for (const ScenarioResult* r : results) {
    write_trajectory_csv((dir / (r->name + ".csv")).string(), r->trajectory, r->problem.params);
    write_file(dir / (r->name + ".manifest.json"), scenario_manifest(*r, options));
  }
  if (baseline && !policies.empty()) {
    const int horizon = std::min(options.report_horizon, baseline->trajectory.periods);
    const ComparisonReport rep = compare(*baseline, policies, horizon);
    write_file(dir / "comparison.tsv", comparison_tsv(rep));
    write_file(dir / "comparison.txt", comparison_text(rep));
    std::string eeg = "t";
    for (const auto& n : rep.eeg_names) eeg += "," + csv_field(n);
    eeg += "\r\n";
    for (int t = 0; t < baseline->trajectory.periods; ++t) {
      eeg += std::to_string(t);
      for (const auto& path : rep.eeg) eeg += "," + format_double(path[t]);
      eeg += "\r\n";
    }
    write_file(dir / "eeg.csv", eeg);
  }
  std::string dict;
  for (const auto& [name, text] : data_dictionary()) dict += name + "\t" + text + "\n";
  write_file(dir / "data_dictionary.tsv", dict);
  if (!options.resolved_config.empty()) write_file(dir / "config.resolved", options.resolved_config);
}

}  // namespace decarb
