#include "decarb/model.hpp"

#include <cmath>

namespace decarb {

CesValue ces_with_gradient(double share, double x1, double x2, double sigma) {
  const double y = ces(share, x1, x2, sigma);
  CesValue out{y, 0.0, 0.0};
  if (y == 0.0) {
    // sigma < 1 with a zero input: the other input has no marginal value
    out.d_x1 = x1 == 0.0 ? std::pow(share, sigma / (sigma - 1.0)) : 0.0;
    out.d_x2 = x2 == 0.0 ? std::pow(1.0 - share, sigma / (sigma - 1.0)) : 0.0;
    if (x1 == 0.0 && x2 == 0.0) out.d_x1 = out.d_x2 = 0.0;
    return out;
  }
  const double inv = 1.0 / sigma;
  out.d_x1 = x1 > 0.0 ? share * std::pow(y / x1, inv) : std::pow(share, sigma / (sigma - 1.0));
  out.d_x2 = x2 > 0.0 ? (1.0 - share) * std::pow(y / x2, inv)
                      : std::pow(1.0 - share, sigma / (sigma - 1.0));
  return out;
}

UtilityValue utility(double c, double h, const ModelParameters& p) {
  if (!(c > 0.0)) throw DomainError("consumption must be positive");
  if (!(h > p.h_bar)) throw DomainError("housing services at or below the subsistence level h_bar");
  const double slack = h - p.h_bar;
  if (p.eta == 1.0) {
    return {p.phi * std::log(c) + (1.0 - p.phi) * std::log(slack), p.phi / c,
            (1.0 - p.phi) / slack};
  }
  const double U = std::pow(c, p.phi) * std::pow(slack, 1.0 - p.phi);
  const double scale = std::pow(U, 1.0 - p.eta);
  return {scale / (1.0 - p.eta), p.phi * scale / c, (1.0 - p.phi) * scale / slack};
}

UtilityHessian utility_hessian(double c, double h, const ModelParameters& p) {
  if (!(c > 0.0) || !(h > p.h_bar)) throw DomainError("utility Hessian outside its domain");
  const double slack = h - p.h_bar;
  const double scale =
      p.eta == 1.0 ? 1.0 : std::pow(std::pow(c, p.phi) * std::pow(slack, 1.0 - p.phi), 1.0 - p.eta);
  const double g = 1.0 - p.eta;
  return {p.phi * (p.phi * g - 1.0) * scale / (c * c),
          p.phi * (1.0 - p.phi) * g * scale / (c * slack),
          (1.0 - p.phi) * ((1.0 - p.phi) * g - 1.0) * scale / (slack * slack)};
}

HousingValue housing_services(double land, double k_H, const ModelParameters& p) {
  if (!(land > 0.0)) throw DomainError("land must be positive");
  if (k_H < 0.0) throw DomainError("housing capital must be non-negative");
  const double stock = p.k_bar + k_H;
  const double h = std::pow(land, p.a_h) * std::pow(stock, 1.0 - p.a_h);
  return {h, p.a_h * h / land, (1.0 - p.a_h) * h / stock};
}

EnergyRequirement housing_energy_requirement(double k_E, double k_H, const ModelParameters& p) {
  if (!(k_E > 0.0)) throw DomainError("efficiency capital must be positive");
  if (k_H < 0.0) throw DomainError("housing capital must be non-negative");
  return {energy_requirement_value(k_E, k_H, p), -p.kappa_bar * p.k_bar / (k_E * k_E), p.kappa_N};
}

CompositePrice composite_energy_price(double p_E, double p_res_full, const ModelParameters& p) {
  if (p.sigma_ene == 1.0) throw DomainError("composite price needs sigma_ene != 1");
  if (!(p_E > 0.0) || !(p_res_full > 0.0)) throw DomainError("energy prices must be positive");
  const double price = ces_unit_cost(p.a_ene, p_E, p_res_full, p.sigma_ene);
  const double s = p.sigma_ene;
  return {price, std::pow(p.a_ene, s) * std::pow(price / p_E, s),
          std::pow(1.0 - p.a_ene, s) * std::pow(price / p_res_full, s)};
}

TechnologyPaths technology_paths(const ModelParameters& p) {
  TechnologyPaths tech;
  tech.A_Y.resize(p.T + 1);
  tech.A_N.resize(p.T + 1);
  tech.A_Y[0] = p.A_Y0;
  tech.A_N[0] = p.A_N0;
  for (int t = 1; t <= p.T; ++t) {
    const double g = p.a_Y * std::exp(-p.b_Y * (t - 1));
    if (g >= 1.0) throw ConfigError("labor productivity recursion undefined: a_Y*exp(-b_Y(t-1)) >= 1");
    tech.A_Y[t] = tech.A_Y[t - 1] / (1.0 - g);
    tech.A_N[t] = tech.A_N[t - 1] / (1.0 - p.g_N);
  }
  return tech;
}

TechnologyPaths frozen_technology(const ModelParameters& p) {
  return {std::vector<double>(p.T + 1, p.A_Y0), std::vector<double>(p.T + 1, p.A_N0)};
}

ProductionBlock production_block(const ProductionInputs& in, double A_Y, double A_N,
                                 const ModelParameters& p) {
  if (in.K_Y < 0 || in.L < 0 || in.E_Y < 0 || in.K_F < 0 || in.Res_F < 0 || in.K_N < 0)
    throw DomainError("production inputs must be non-negative");
  ProductionBlock b{};
  // Z = K^a_Z (A L)^(1-a_Z)
  const double effective_labor = A_Y * in.L;
  b.Z = std::pow(in.K_Y, p.a_Z) * std::pow(effective_labor, 1.0 - p.a_Z);
  const CesValue y = ces_with_gradient(p.a, b.Z, in.E_Y, p.sigma);
  b.Y = y.value;
  const double dZ_dK = in.K_Y > 0 ? p.a_Z * b.Z / in.K_Y : 0.0;
  const double dZ_dL = in.L > 0 ? (1.0 - p.a_Z) * b.Z / in.L : 0.0;
  b.dY_dKY = y.d_x1 * dZ_dK;
  b.dY_dL = y.d_x1 * dZ_dL;
  b.dY_dEY = y.d_x2;

  const CesValue ef = ces_with_gradient(p.a_F, in.K_F, in.Res_F, p.sigma_F);
  b.E_F = ef.value;
  b.dEF_dKF = ef.d_x1;
  b.dEF_dRes = ef.d_x2;

  b.E_N = A_N * in.K_N;
  b.dEN_dKN = A_N;

  const CesValue e = ces_with_gradient(p.a_E, b.E_F, b.E_N, p.sigma_E);
  b.E = e.value;
  b.dE_dEF = e.d_x1;
  b.dE_dEN = e.d_x2;
  return b;
}

}  // namespace decarb
