#pragma once

#include <optional>
#include <string>
#include <vector>

#include "decarb/config.hpp"

namespace decarb {

struct PipelineResult {
  ModelParameters params;
  std::optional<CalibrationResult> calibration;
  std::optional<SectorBudgets> split;
  std::vector<ScenarioResult> results;  ///< dependency order: no-policy, first-best, phased-in, subsidy

  const ScenarioResult* find(const std::string& name) const;
  std::vector<const ScenarioResult*> pointers() const;
};

/// Runs the named scenarios and whatever they depend on. Policy scenarios
/// need the no-policy baseline and the first best for the budget split.
PipelineResult run_pipeline(const RunConfig& cfg, const std::vector<std::string>& names);

}  // namespace decarb
