#pragma once

#include <string>
#include <vector>

#include "decarb/calibration.hpp"
#include "decarb/scenarios.hpp"

namespace decarb {

/// Fully resolved run configuration. Text form is one `section.key = value`
/// per line; `#` starts a comment. Sections: params, targets, scenario,
/// solver, run.
struct RunConfig {
  ModelParameters params;
  CalibrationTargets targets;
  ScenarioConfig scenario;
  std::vector<std::string> scenarios = {"no-policy", "first-best", "phased-in", "subsidy"};
  std::string output = "results";
  bool calibrate = true;  ///< calibrate params to the targets before running
  long seed = 0;          ///< reserved; every algorithm is deterministic

  /// Sets one dotted key; throws ConfigError on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  /// Applies a file; later lines override earlier ones.
  void load(const std::string& path);
  void parse(const std::string& text, const std::string& source = "<config>");
  /// Every key with its current value, in a form `parse` accepts.
  std::string to_text() const;
};

const std::vector<std::string>& known_scenarios();

}  // namespace decarb
