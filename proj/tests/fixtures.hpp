#pragma once

#include "decarb/calibration.hpp"
#include "decarb/pipeline.hpp"
#include "decarb/transition.hpp"

namespace decarb::testing {

/// Parameters calibrated to the default targets, computed once.
inline const ModelParameters& calibrated_params() {
  static const ModelParameters p = calibrate(CalibrationTargets{}, table1_parameters()).params;
  return p;
}

/// Calibrated economy with horizon T starting from scaled stationary stocks.
inline TransitionProblem small_problem(int T, const StockVector& scale = {1, 1, 1, 1, 1}) {
  TransitionProblem pb;
  pb.params = calibrated_params();
  pb.params.T = T;
  pb.tech = technology_paths(pb.params);
  const StockVector s = stocks_of(solve_steady_state(pb.params));
  pb.initial = {s.K_Y * scale.K_Y, s.K_F * scale.K_F, s.K_N * scale.K_N, s.k_H * scale.k_H, s.k_E * scale.k_E};
  return pb;
}

/// Every scenario at the default configuration, computed once.
inline const PipelineResult& full_pipeline() {
  static const PipelineResult r = run_pipeline(RunConfig{}, known_scenarios());
  return r;
}

}  // namespace decarb::testing
