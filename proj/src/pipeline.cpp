#include "decarb/pipeline.hpp"

#include <algorithm>

#include "decarb/errors.hpp"

namespace decarb {

const ScenarioResult* PipelineResult::find(const std::string& name) const {
  for (const auto& r : results)
    if (r.name == name) return &r;
  return nullptr;
}

std::vector<const ScenarioResult*> PipelineResult::pointers() const {
  std::vector<const ScenarioResult*> out;
  for (const auto& r : results) out.push_back(&r);
  return out;
}

PipelineResult run_pipeline(const RunConfig& cfg, const std::vector<std::string>& names) {
  if (names.empty()) throw ConfigError("no scenario requested");
  auto wants = [&](const char* n) { return std::find(names.begin(), names.end(), n) != names.end(); };
  for (const auto& n : names)
    if (std::find(known_scenarios().begin(), known_scenarios().end(), n) == known_scenarios().end())
      throw ConfigError("unknown scenario '" + n + "'");

  PipelineResult out;
  out.params = cfg.params;
  if (cfg.calibrate) {
    out.calibration = calibrate(cfg.targets, cfg.params);
    out.params = out.calibration->params;
  }
  const ScenarioConfig& sc = cfg.scenario;
  sc.validate(out.params);
  out.results.reserve(4);
  out.results.push_back(run_no_policy(out.params, sc));
  const bool need_split = wants("phased-in") || wants("subsidy");
  if (!(wants("first-best") || need_split)) return out;
  out.results.push_back(run_first_best(out.results[0], sc));
  if (!need_split) return out;
  out.split = split_carbon_budget(out.results[1]);
  if (wants("phased-in")) out.results.push_back(run_phased_in(out.results[1], *out.split, sc));
  if (wants("subsidy")) out.results.push_back(run_subsidy(out.results[1], *out.split, sc));
  return out;
}

}  // namespace decarb
