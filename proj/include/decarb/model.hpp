#pragma once

#include <cmath>
#include <vector>

#include "decarb/dual.hpp"
#include "decarb/errors.hpp"
#include "decarb/params.hpp"

namespace decarb {

// ---------------------------------------------------------------------------
// Domain records
// ---------------------------------------------------------------------------

/// Quantities of one period. Household variables are per household, the
/// production-side aggregates (Y, Z, E, E_*, K_*, Res_F, L) are economy-wide.
struct PeriodAllocation {
  double c = 0, h = 0, ene = 0, e = 0, res = 0;
  double i_Y = 0, i_F = 0, i_N = 0, i_H = 0, i_E = 0;
  double k_Y = 0, k_F = 0, k_N = 0, k_H = 0, k_E = 0;
  double land = 0;
  double Y = 0, Z = 0, L = 0, E = 0, E_Y = 0, E_F = 0, E_N = 0;
  double K_Y = 0, K_F = 0, K_N = 0, Res_F = 0;
};

/// Prices in final-good units.
struct PriceSystem {
  double p_E = 0, p_F = 0, p_N = 0, p_ene = 0;
  double R = 0, R_F = 0, R_N = 0, w = 0;
};

struct MultiplierSet {
  double lambda = 0, chi = 0, nu_e = 0, nu_ene = 0;
  double psi = 0, psi_F = 0, psi_N = 0, psi_H = 0, psi_E = 0;
  double phi_H = 0, phi_E = 0;
  double mu_R = 0, mu = 0;
  double chi_Y = 0, chi_F = 0, chi_N = 0, chi_E = 0;
};

/// Exogenous productivity paths, indexed t = 0..T.
struct TechnologyPaths {
  std::vector<double> A_Y;
  std::vector<double> A_N;
};

// ---------------------------------------------------------------------------
// CES aggregator
// ---------------------------------------------------------------------------

/// (share*x1^r + (1-share)*x2^r)^(1/r) with r = (sigma-1)/sigma.
/// sigma == 1 is rejected (callers write Cobb-Douglas explicitly); for
/// sigma < 1 a zero input yields the limit value 0.
template <class T>
T ces(double share, const T& x1, const T& x2, double sigma) {
  if (sigma == 1.0) throw DomainError("CES elasticity of 1 is not supported; use the Cobb-Douglas form");
  if (!(sigma > 0.0)) throw DomainError("CES elasticity must be positive");
  if (x1 < 0.0 || x2 < 0.0) throw DomainError("CES inputs must be non-negative");
  const double r = (sigma - 1.0) / sigma;
  if (sigma < 1.0 && (value_of(x1) == 0.0 || value_of(x2) == 0.0)) return T(0.0);
  if (value_of(x1) == 0.0 && value_of(x2) == 0.0) return T(0.0);
  using std::pow;
  if (value_of(x1) == 0.0) return x2 * std::pow(1.0 - share, 1.0 / r);
  if (value_of(x2) == 0.0) return x1 * std::pow(share, 1.0 / r);
  return pow(share * pow(x1, r) + (1.0 - share) * pow(x2, r), 1.0 / r);
}

struct CesValue {
  double value;
  double d_x1;
  double d_x2;
};

/// CES value with analytic partials: dY/dx_i = share_i * (Y/x_i)^(1/sigma).
CesValue ces_with_gradient(double share, double x1, double x2, double sigma);

/// Unit cost of a CES aggregator with input prices p1, p2.
template <class T>
T ces_unit_cost(double share, const T& p1, const T& p2, double sigma) {
  using std::pow;
  return pow(std::pow(share, sigma) * pow(p1, 1.0 - sigma) +
                 std::pow(1.0 - share, sigma) * pow(p2, 1.0 - sigma),
             1.0 / (1.0 - sigma));
}

// ---------------------------------------------------------------------------
// Households
// ---------------------------------------------------------------------------

struct UtilityValue {
  double u;
  double u_c;
  double u_h;
};

/// Period utility; log form when eta == 1. Throws DomainError when c <= 0 or
/// h <= h_bar.
UtilityValue utility(double c, double h, const ModelParameters& p);

struct UtilityHessian {
  double u_cc, u_ch, u_hh;
};
UtilityHessian utility_hessian(double c, double h, const ModelParameters& p);

/// Marginal utilities only (templated for the solver).
template <class T>
void marginal_utilities(const T& c, const T& h, const ModelParameters& p, T& u_c, T& u_h) {
  using std::exp;
  using std::log;
  if (c <= 0.0) throw DomainError("consumption must be positive");
  const T slack = h - p.h_bar;
  if (slack <= 0.0) throw DomainError("housing services at or below the subsistence level h_bar");
  if (p.eta == 1.0) {
    u_c = p.phi / c;
    u_h = (1.0 - p.phi) / slack;
    return;
  }
  // U^(1-eta) with U = c^phi (h - h_bar)^(1-phi)
  const T scale = exp((1.0 - p.eta) * (p.phi * log(c) + (1.0 - p.phi) * log(slack)));
  u_c = p.phi * scale / c;
  u_h = (1.0 - p.phi) * scale / slack;
}

struct HousingValue {
  double h;
  double d_land;
  double d_kH;
};

/// land^a_h * (k_bar + k_H)^(1-a_h).
HousingValue housing_services(double land, double k_H, const ModelParameters& p);

template <class T>
T housing_services_value(double land, const T& k_H, const ModelParameters& p) {
  using std::pow;
  return std::pow(land, p.a_h) * pow(p.k_bar + k_H, 1.0 - p.a_h);
}

struct EnergyRequirement {
  double ene;
  double d_kE;
  double d_kH;
};

/// (kappa_bar/k_E + kappa_N)*k_bar + kappa_N*k_H.
EnergyRequirement housing_energy_requirement(double k_E, double k_H, const ModelParameters& p);

template <class T>
T energy_requirement_value(const T& k_E, const T& k_H, const ModelParameters& p) {
  return (p.kappa_bar / k_E + p.kappa_N) * p.k_bar + p.kappa_N * k_H;
}

struct CompositePrice {
  double price;
  double d_pE;    ///< electricity used per unit of the composite (Shephard)
  double d_pres;  ///< fossil resource used per unit of the composite
};

/// Minimum cost of one unit of the household energy composite.
CompositePrice composite_energy_price(double p_E, double p_res_full, const ModelParameters& p);

// ---------------------------------------------------------------------------
// Technology and production
// ---------------------------------------------------------------------------

/// A_Y and A_N for t = 0..T. Throws ConfigError if the labor-productivity
/// recursion is undefined.
TechnologyPaths technology_paths(const ModelParameters& p);

/// Both paths held at their initial values (no technological progress).
TechnologyPaths frozen_technology(const ModelParameters& p);

struct ProductionInputs {
  double K_Y = 0, L = 0, E_Y = 0, K_F = 0, Res_F = 0, K_N = 0;
};

struct ProductionBlock {
  double Y, Z, E, E_F, E_N;
  double dY_dKY, dY_dL, dY_dEY;
  double dE_dEF, dE_dEN;
  double dEF_dKF, dEF_dRes;
  double dEN_dKN;
};

/// Evaluates final good, final electricity, fossil and renewable electricity
/// with every marginal product.
ProductionBlock production_block(const ProductionInputs& in, double A_Y, double A_N,
                                 const ModelParameters& p);

}  // namespace decarb
