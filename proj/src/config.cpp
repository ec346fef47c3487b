#include "decarb/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "decarb/errors.hpp"
#include "decarb/reporting.hpp"

namespace decarb {
namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double number(const std::string& key, const std::string& v) {
  try {
    return parse_double(v);
  } catch (const IoError&) {
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  }
}

int integer(const std::string& key, const std::string& v) {
  const double d = number(key, v);
  if (d != static_cast<int>(d)) throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
  return static_cast<int>(d);
}

bool boolean(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
  return s;
}

}  // namespace

const std::vector<std::string>& known_scenarios() {
  static const std::vector<std::string> names = {"no-policy", "first-best", "phased-in", "subsidy"};
  return names;
}

void RunConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  const auto dot = key.find('.');
  if (dot == std::string::npos) throw ConfigError("config key '" + key + "' has no section");
  const std::string section = key.substr(0, dot);
  const std::string name = key.substr(dot + 1);
  if (section == "params") {
    params.set(name, number(key, v));
  } else if (section == "targets") {
    targets.set(name, number(key, v));
  } else if (section == "scenario") {
    ScenarioConfig& s = scenario;
    if (name == "budget_window") s.budget_window = integer(key, v);
    else if (name == "reduction") s.reduction = number(key, v);
    else if (name == "budget_rule") s.rule = parse_budget_rule(v);
    else if (name == "cap_markup") s.cap_markup = number(key, v);
    else if (name == "cap_window") s.cap_window = integer(key, v);
    else if (name == "report_horizon") s.report_horizon = integer(key, v);
    else if (name == "subsidy_decay_guess") s.subsidy_decay_guess = number(key, v);
    else if (name == "subsidy_length_guess") s.subsidy_length_guess = number(key, v);
    else if (name == "subsidy_max_evaluations") s.subsidy_max_evaluations = integer(key, v);
    else if (name == "subsidy_simplex_tolerance") s.subsidy_simplex_tolerance = number(key, v);
    else throw ConfigError("unknown config key '" + key + "'");
  } else if (section == "solver") {
    SolverOptions& o = scenario.solver;
    if (name == "tolerance") o.tolerance = number(key, v);
    else if (name == "stage_tolerance") o.stage_tolerance = number(key, v);
    else if (name == "max_iterations") o.max_iterations = integer(key, v);
    else if (name == "backtrack") o.backtrack = number(key, v);
    else if (name == "max_log_step") o.max_log_step = number(key, v);
    else if (name == "polish") o.polish = boolean(key, v);
    else if (name == "verbose") o.verbose = boolean(key, v);
    else if (name == "eps_schedule") {
      o.eps_schedule.clear();
      for (const auto& item : split_list(v)) o.eps_schedule.push_back(number(key, item));
    } else throw ConfigError("unknown config key '" + key + "'");
  } else if (section == "run") {
    if (name == "scenarios") {
      auto list = split_list(v);
      for (const auto& n : list)
        if (std::find(known_scenarios().begin(), known_scenarios().end(), n) == known_scenarios().end())
          throw ConfigError("unknown scenario '" + n + "'");
      scenarios = std::move(list);
    } else if (name == "output") output = v;
    else if (name == "calibrate") calibrate = boolean(key, v);
    else if (name == "seed") seed = integer(key, v);
    else throw ConfigError("unknown config key '" + key + "'");
  } else {
    throw ConfigError("unknown config section '" + section + "'");
  }
}

void RunConfig::parse(const std::string& text, const std::string& source) {
  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    try {
      set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  parse(ss.str(), path);
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  os << "# resolved configuration\n";
  for (const auto& f : ModelParameters::field_names()) os << "params." << f << " = " << format_double(params.get(f)) << "\n";
  const CalibrationTargets& t = targets;
  os << "targets.housing_exp_share = " << format_double(t.housing_exp_share) << "\n"
     << "targets.heat_cost_ratio = " << format_double(t.heat_cost_ratio) << "\n"
     << "targets.renewable_share = " << format_double(t.renewable_share) << "\n"
     << "targets.residential_res_share = " << format_double(t.residential_res_share) << "\n"
     << "targets.old_housing_share = " << format_double(t.old_housing_share) << "\n"
     << "targets.land_price_normalization = " << format_double(t.land_price_normalization) << "\n";
  const ScenarioConfig& s = scenario;
  os << "scenario.budget_window = " << s.budget_window << "\n"
     << "scenario.reduction = " << format_double(s.reduction) << "\n"
     << "scenario.budget_rule = " << to_string(s.rule) << "\n"
     << "scenario.cap_markup = " << format_double(s.cap_markup) << "\n"
     << "scenario.cap_window = " << s.cap_window << "\n"
     << "scenario.report_horizon = " << s.report_horizon << "\n"
     << "scenario.subsidy_decay_guess = " << format_double(s.subsidy_decay_guess) << "\n"
     << "scenario.subsidy_length_guess = " << format_double(s.subsidy_length_guess) << "\n"
     << "scenario.subsidy_max_evaluations = " << s.subsidy_max_evaluations << "\n"
     << "scenario.subsidy_simplex_tolerance = " << format_double(s.subsidy_simplex_tolerance) << "\n";
  const SolverOptions& o = s.solver;
  std::vector<std::string> eps;
  for (double e : o.eps_schedule) eps.push_back(format_double(e));
  os << "solver.tolerance = " << format_double(o.tolerance) << "\n"
     << "solver.stage_tolerance = " << format_double(o.stage_tolerance) << "\n"
     << "solver.max_iterations = " << o.max_iterations << "\n"
     << "solver.backtrack = " << format_double(o.backtrack) << "\n"
     << "solver.max_log_step = " << format_double(o.max_log_step) << "\n"
     << "solver.eps_schedule = " << join(eps) << "\n"
     << "solver.polish = " << (o.polish ? "true" : "false") << "\n"
     << "solver.verbose = " << (o.verbose ? "true" : "false") << "\n";
  os << "run.scenarios = " << join(scenarios) << "\n"
     << "run.output = " << output << "\n"
     << "run.calibrate = " << (calibrate ? "true" : "false") << "\n"
     << "run.seed = " << seed << "\n";
  return os.str();
}

}  // namespace decarb
