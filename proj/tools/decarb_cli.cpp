// decarb: calibrate the model, run policy scenarios, compare and export them.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "decarb/errors.hpp"
#include "decarb/pipeline.hpp"
#include "decarb/reporting.hpp"

namespace fs = std::filesystem;
using namespace decarb;

namespace {

enum Exit { kOk = 0, kUsage = 1, kNumerical = 2, kIo = 3 };

struct Overrides {
  std::string config;
  std::string out;
  double tol = 0.0;
  int horizon = 0;
  std::string budget_rule;
  double cap_markup = -1.0;
  int cap_window = -1;
  std::vector<std::string> params;
  std::vector<std::string> targets;
  bool verbose = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "key = value configuration file");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--param", o.params, "parameter override name=value (repeatable)");
  cmd->add_option("--target", o.targets, "calibration target override name=value (repeatable)");
  cmd->add_flag("--verbose", o.verbose, "print Newton progress");
}

void add_scenario_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--tol", o.tol, "final residual tolerance");
  cmd->add_option("--horizon", o.horizon, "simulation horizon T");
  cmd->add_option("--budget-rule", o.budget_rule, "cumulative30 or flow30");
  cmd->add_option("--cap-markup", o.cap_markup, "phased-in housing price as a fraction of p_R");
  cmd->add_option("--cap-window", o.cap_window, "periods the housing price is capped");
}

void split_assignment(const std::string& text, std::string& key, std::string& value) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError("expected name=value, got '" + text + "'");
  key = text.substr(0, eq);
  value = text.substr(eq + 1);
}

RunConfig resolve(const Overrides& o) {
  RunConfig cfg;
  if (!o.config.empty()) cfg.load(o.config);
  std::string k, v;
  for (const auto& a : o.params) {
    split_assignment(a, k, v);
    cfg.set("params." + k, v);
  }
  for (const auto& a : o.targets) {
    split_assignment(a, k, v);
    cfg.set("targets." + k, v);
  }
  if (o.tol > 0.0) cfg.scenario.solver.tolerance = o.tol;
  if (o.horizon > 0) cfg.params.T = o.horizon;
  if (!o.budget_rule.empty()) cfg.scenario.rule = parse_budget_rule(o.budget_rule);
  if (o.cap_markup >= 0.0) cfg.scenario.cap_markup = o.cap_markup;
  if (o.cap_window >= 0) cfg.scenario.cap_window = o.cap_window;
  if (o.verbose) cfg.scenario.solver.verbose = true;
  if (!o.out.empty()) cfg.output = o.out;
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw IoError("cannot write '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_calibrate(const Overrides& o) {
  RunConfig cfg = resolve(o);
  const CalibrationResult cal = calibrate(cfg.targets, cfg.params);
  const fs::path dir = cfg.output;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "'");

  std::string params = "# calibrated parameters\n";
  for (const auto& f : ModelParameters::field_names()) params += "params." + f + " = " + format_double(cal.params.get(f)) + "\n";
  write_text(dir / "calibrated.cfg", params);

  std::ostringstream rep;
  rep << "target\ttarget_value\tmodel_value\tabs_error\trel_error\tflagged\n";
  for (const auto& r : cal.report.rows)
    rep << r.name << "\t" << format_double(r.target) << "\t" << format_double(r.model) << "\t"
        << format_double(r.abs_error) << "\t" << format_double(r.rel_error) << "\t" << (r.flagged ? 1 : 0) << "\n";
  rep << "\nparameter\tpublished\tcalibrated\twithin_rounding\n";
  for (const auto& c : compare_with_published(cal.params))
    rep << c.name << "\t" << format_double(c.published) << "\t" << format_double(c.model) << "\t"
        << (c.within_rounding ? 1 : 0) << "\n";
  write_text(dir / "calibration_report.tsv", rep.str());
  write_text(dir / "config.resolved", cfg.to_text());
  std::cout << rep.str();
  return cal.report.all_within() ? kOk : kNumerical;
}

void dump_iterate(const SolverError& e, const std::string& out) {
  if (e.iterate().empty()) return;
  std::error_code ec;
  fs::create_directories(out, ec);
  Trajectory t;
  t.x = e.iterate();
  t.periods = static_cast<int>(t.x.size()) / kUnknownsPerPeriod;
  t.border.assign(t.x.begin() + static_cast<long>(t.periods) * kUnknownsPerPeriod, t.x.end());
  const std::string path = (fs::path(out) / "failed_iterate.txt").string();
  try {
    save_checkpoint(path, t);
    std::cerr << "best iterate written to " << path << "\n";
  } catch (const IoError&) {
  }
}

int run_and_export(const RunConfig& cfg, const std::vector<std::string>& names) {
  PipelineResult res;
  try {
    res = run_pipeline(cfg, names);
  } catch (const SolverError& e) {
    dump_iterate(e, cfg.output);
    throw;
  }
  ExportOptions opt;
  opt.resolved_config = cfg.to_text();
  opt.report_horizon = cfg.scenario.report_horizon;
  export_results(res.pointers(), cfg.output, opt);
  bool converged = true;
  for (const auto& r : res.results) {
    converged = converged && r.diagnostics.converged;
    std::fprintf(stdout, "%-12s norm %.2e  iterations %3d  %.2fs\n", r.name.c_str(), r.diagnostics.final_norm,
                 r.diagnostics.iterations, r.wall_seconds);
  }
  std::cout << "outputs in " << cfg.output << "\n";
  return converged ? kOk : kNumerical;
}

struct LoadedScenario {
  std::string name;
  std::string dir;
  ModelParameters params;
  Trajectory trajectory;
  nlohmann::json manifest;
};

std::vector<LoadedScenario> load_run(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("'" + dir + "' is not a directory");
  RunConfig cfg;
  cfg.parse(read_text(fs::path(dir) / "config.resolved"), dir + "/config.resolved");
  std::vector<LoadedScenario> out;
  std::vector<fs::path> manifests;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string f = entry.path().filename().string();
    if (f.size() > 14 && f.substr(f.size() - 14) == ".manifest.json") manifests.push_back(entry.path());
  }
  std::sort(manifests.begin(), manifests.end());
  for (const auto& m : manifests) {
    LoadedScenario s;
    try {
      s.manifest = nlohmann::json::parse(read_text(m));
    } catch (const nlohmann::json::exception& e) {
      throw IoError("bad manifest '" + m.string() + "': " + e.what());
    }
    s.name = s.manifest.at("scenario").get<std::string>();
    s.dir = dir;
    s.params = cfg.params;
    s.trajectory = trajectory_from_csv(read_csv((fs::path(dir) / (s.name + ".csv")).string()), s.params);
    out.push_back(std::move(s));
  }
  return out;
}

int cmd_compare(const std::vector<std::string>& dirs, const std::string& out_path, int horizon) {
  if (dirs.empty()) throw ConfigError("compare needs at least one result directory");
  std::vector<LoadedScenario> all;
  for (const auto& d : dirs)
    for (auto& s : load_run(d)) all.push_back(std::move(s));
  const LoadedScenario* base = nullptr;
  for (const auto& s : all)
    if (s.name == "no-policy") base = &s;
  if (!base) throw ConfigError("compare needs a no-policy baseline among the result directories");

  std::map<std::string, double> M0s;
  bool converged = true;
  for (const auto& s : all) {
    converged = converged && s.manifest.at("solver").at("converged").get<bool>();
    if (s.name != "no-policy" && !s.manifest.at("M0").is_null()) M0s[s.dir + "/" + s.name] = s.manifest.at("M0").get<double>();
  }
  for (const auto& [k, v] : M0s)
    if (v != M0s.begin()->second)
      throw ConfigError("runs use different budgets M0 (" + M0s.begin()->first + " vs " + k + "); refusing to compare");

  ComparisonReport rep;
  rep.horizon = horizon;
  for (const auto& s : all) {
    if (&s == base) continue;
    rep.rows.push_back(cost_metrics(s.trajectory, base->trajectory, base->params, horizon, s.name));
  }
  if (rep.rows.empty()) rep.rows.push_back(cost_metrics(base->trajectory, base->trajectory, base->params, horizon, base->name));
  const std::string text = comparison_text(rep);
  std::cout << text;
  if (!out_path.empty()) {
    const fs::path p(out_path);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw IoError("cannot create '" + out_path + "'");
    write_text(p / "comparison.tsv", comparison_tsv(rep));
    write_text(p / "comparison.txt", text);
  }
  return converged ? kOk : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perfect-foresight transition model of residential decarbonization"};
  app.require_subcommand(1);

  Overrides cal_o, run_o, exp_o;
  auto* cal = app.add_subcommand("calibrate", "calibrate parameters to the stationary targets");
  add_common(cal, cal_o);

  std::vector<std::string> run_names;
  auto* run = app.add_subcommand("run", "solve one or more scenarios (dependencies run first)");
  run->add_option("scenario", run_names, "no-policy | first-best | phased-in | subsidy")->required();
  add_common(run, run_o);
  add_scenario_flags(run, run_o);

  std::vector<std::string> dirs;
  std::string cmp_out;
  int cmp_horizon = 60;
  auto* cmp = app.add_subcommand("compare", "Table 2 comparison of result directories");
  cmp->add_option("dirs", dirs, "result directories")->required();
  cmp->add_option("--out", cmp_out, "directory for comparison.tsv/.txt");
  cmp->add_option("--horizon", cmp_horizon, "reporting horizon");

  auto* exp = app.add_subcommand("export", "run every configured scenario and export all figure data");
  add_common(exp, exp_o);
  add_scenario_flags(exp, exp_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*cal) return cmd_calibrate(cal_o);
    if (*run) {
      for (const auto& n : run_names)
        if (std::find(known_scenarios().begin(), known_scenarios().end(), n) == known_scenarios().end())
          throw ConfigError("unknown scenario '" + n + "'");
      return run_and_export(resolve(run_o), run_names);
    }
    if (*cmp) return cmd_compare(dirs, cmp_out, cmp_horizon);
    if (*exp) {
      const RunConfig cfg = resolve(exp_o);
      return run_and_export(cfg, cfg.scenarios);
    }
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const SolverError& e) {
    std::cerr << "numerical failure: " << e.what() << " (final norm " << e.final_norm() << ")\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}
