#pragma once

#include <array>

#include "decarb/model.hpp"

namespace decarb {

/// Stationary allocation of the economy without technological progress.
struct SteadyState {
  PeriodAllocation alloc;
  PriceSystem prices;
  MultiplierSet multipliers;
  double land_price = 0.0;
  double land_rent = 0.0;  ///< imputed rent of the household's land, final-good units
  double residual_norm = 0.0;
  double min_singular_value = 0.0;
  int iterations = 0;
};

/// Constant policy wedges a stationary point may carry (zero = no policy).
struct StationaryPolicy {
  double p_C = 0.0, p_HC = 0.0, tau_E = 0.0, tau_H = 0.0;
};

struct SteadyStateOptions {
  double tolerance = 1e-12;
  int max_iterations = 50;
};

/// Solves the stationary system at A_Y0, A_N0. The one-dimensional housing
/// condition is bracketed first; a damped Newton step on all nine conditions
/// then polishes the point. Throws InfeasibleError if no admissible point
/// exists and SolverError if Newton fails.
SteadyState solve_steady_state(const ModelParameters& p, const StationaryPolicy& policy = {},
                               const SteadyStateOptions& options = {});

/// The nine stationary conditions at log-quantities
/// x = (K_Y, K_F, K_N, k_H, k_E, e, res, Res_F, E_Y).
std::array<double, 9> stationary_residuals(const std::array<double, 9>& x, const ModelParameters& p,
                                           const StationaryPolicy& policy = {});

namespace detail {

/// Prices pinned by the stationary rental rates and the resource price.
struct StationaryPrices {
  double R, R_F, R_N;
  double p_F, p_N, p_E, p_Z, w, p_res, p_ene;
};
StationaryPrices stationary_prices(const ModelParameters& p, const StationaryPolicy& policy);

/// Industry quantities implied by the prices and total electricity demand.
struct IndustryQuantities {
  double K_Y, Z, Y, E_Y, E, E_F, E_N, K_F, K_N, Res_F;
};
IndustryQuantities final_good_block(const ModelParameters& p, const StationaryPrices& pr);
void electricity_block(const ModelParameters& p, const StationaryPrices& pr, const StationaryPolicy& policy,
                       double household_electricity, IndustryQuantities& q);

/// Household electricity and fossil resource per unit of the energy composite.
std::array<double, 2> energy_mix_per_unit(const ModelParameters& p, const StationaryPrices& pr);

}  // namespace detail
}  // namespace decarb
