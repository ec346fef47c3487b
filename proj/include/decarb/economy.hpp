#pragma once

// Templated evaluation of one period of the decentralized economy. Shared by
// the stationary solver and the transition solver; instantiated with double
// and with Dual<N> to obtain exact Jacobian blocks.

#include <cmath>

#include "decarb/dual.hpp"
#include "decarb/model.hpp"

namespace decarb::detail {

/// Decision variables that enter one period. Industry stocks are economy-wide
/// aggregates, housing and efficiency capital are per household.
template <class T>
struct PeriodInputs {
  T K_Y, K_F, K_N, k_H, k_E;       // beginning of period
  T K_Y1, K_F1, K_N1, k_H1, k_E1;  // beginning of next period
  T e, res, Res_F, E_Y;
  T phi_H, phi_E;  // irreversibility multipliers over lambda
};

/// Exogenous data of one period. Carbon prices are p_fixed + scale/u_c, so
/// Hotelling-type prices can be expressed in utility units.
template <class T>
struct PeriodExogenous {
  double A_Y = 1.0, A_N = 1.0;
  T p_C = 0.0, p_HC = 0.0;
  T p_C_util = 0.0, p_HC_util = 0.0;
  T tau_E = 0.0, tau_H = 0.0;
};

template <class T>
struct PeriodValues {
  T Y, Z, E, E_F, E_N;
  T p_E, p_F, p_N, R, R_F, R_N, w;
  T dEF_dRes;
  T i_Y, i_F, i_N, i_H, i_E;
  T c, h, h_kH, u_c, u_h;
  T p_C, p_HC, p_res, p_ene;
  T ene_req, ene_supply;
  T tau_E, tau_H;
};

template <class T>
T marginal_ces(double share, const T& y, const T& x, double sigma) {
  using std::pow;
  return share * pow(y / x, 1.0 / sigma);
}

template <class T>
PeriodValues<T> evaluate_period(const PeriodInputs<T>& in, const PeriodExogenous<T>& ex,
                                const ModelParameters& p, int period = -1) {
  using std::exp;
  using std::log;
  using std::pow;
  PeriodValues<T> v;
  if (in.K_Y <= 0.0 || in.K_F <= 0.0 || in.K_N <= 0.0 || in.k_E <= 0.0 || in.k_H < 0.0 ||
      in.e <= 0.0 || in.res <= 0.0 || in.Res_F <= 0.0 || in.E_Y <= 0.0)
    throw DomainError("non-positive quantity", period);

  // final good
  const double AL = ex.A_Y * p.L_total;
  v.Z = pow(in.K_Y, p.a_Z) * std::pow(AL, 1.0 - p.a_Z);
  v.Y = ces(p.a, v.Z, in.E_Y, p.sigma);
  const T Y_Z = marginal_ces(p.a, v.Y, v.Z, p.sigma);
  v.p_E = marginal_ces(1.0 - p.a, v.Y, in.E_Y, p.sigma);
  v.R = Y_Z * p.a_Z * v.Z / in.K_Y;
  v.w = Y_Z * (1.0 - p.a_Z) * v.Z / p.L_total;

  // electricity
  v.E_F = ces(p.a_F, in.K_F, in.Res_F, p.sigma_F);
  v.E_N = ex.A_N * in.K_N;
  v.E = ces(p.a_E, v.E_F, v.E_N, p.sigma_E);
  v.p_F = v.p_E * marginal_ces(p.a_E, v.E, v.E_F, p.sigma_E);
  v.p_N = v.p_E * marginal_ces(1.0 - p.a_E, v.E, v.E_N, p.sigma_E);
  v.R_F = v.p_F * marginal_ces(p.a_F, v.E_F, in.K_F, p.sigma_F);
  v.dEF_dRes = marginal_ces(1.0 - p.a_F, v.E_F, in.Res_F, p.sigma_F);
  v.R_N = v.p_N * ex.A_N;

  v.i_Y = in.K_Y1 - (1.0 - p.delta_Y) * in.K_Y;
  v.i_F = in.K_F1 - (1.0 - p.delta_F) * in.K_F;
  v.i_N = in.K_N1 - (1.0 - p.delta_N) * in.K_N;
  v.i_H = in.k_H1 - (1.0 - p.delta_H) * in.k_H;
  v.i_E = in.k_E1 - (1.0 - p.delta_E) * in.k_E;

  // consumption from the balance of payments
  v.c = (v.Y - p.p_R * (p.n * in.res + in.Res_F) - (v.i_Y + v.i_F + v.i_N)) / p.n - v.i_H - v.i_E -
        p.delta_H * p.k_bar;
  if (v.c <= 0.0) throw DomainError("consumption is not positive", period);

  const double land = p.land_per_household();
  v.h = housing_services_value(land, in.k_H, p);
  if (v.h <= p.h_bar) throw DomainError("housing services at or below h_bar", period);
  v.h_kH = (1.0 - p.a_h) * v.h / (p.k_bar + in.k_H);
  marginal_utilities(v.c, v.h, p, v.u_c, v.u_h);

  v.p_C = ex.p_C + ex.p_C_util / v.u_c;
  v.p_HC = ex.p_HC + ex.p_HC_util / v.u_c;
  v.p_res = p.p_R + v.p_HC;
  v.p_ene = ces_unit_cost(p.a_ene, v.p_E, v.p_res, p.sigma_ene);
  v.ene_req = energy_requirement_value(in.k_E, in.k_H, p);
  v.ene_supply = ces(p.a_ene, in.e, in.res, p.sigma_ene);
  v.tau_E = ex.tau_E;
  v.tau_H = ex.tau_H;
  return v;
}

/// Static conditions of one period: energy mix, energy identity, fossil
/// resource demand of electricity, electricity market clearing.
template <class T>
void static_residuals(const PeriodInputs<T>& in, const PeriodValues<T>& v, const ModelParameters& p,
                      T* out) {
  using std::log;
  const double s = p.sigma_ene;
  out[0] = log(in.e) - log(in.res) - s * std::log(p.a_ene / (1.0 - p.a_ene)) + s * (log(v.p_E) - log(v.p_res));
  out[1] = log(v.ene_supply) - log(v.ene_req);
  out[2] = log(v.p_F * v.dEF_dRes) - log(p.p_R + v.p_C);
  out[3] = log(in.E_Y + p.n * in.e) - log(v.E);
}

/// Intertemporal conditions linking period t (now) and t+1 (next).
template <class T>
void euler_residuals(const PeriodInputs<T>& in_now, const PeriodValues<T>& now,
                     const PeriodInputs<T>& in_next, const PeriodValues<T>& next,
                     const ModelParameters& p, T* out) {
  using std::log;
  const double beta = p.beta();
  const T lu = log(now.u_c) - std::log(beta) - log(next.u_c);
  out[0] = lu - log(next.R + 1.0 - p.delta_Y);
  out[1] = lu - log(next.R_F + 1.0 - p.delta_F);
  out[2] = lu - log(next.R_N + 1.0 - p.delta_N);
  const T growth = beta * next.u_c / now.u_c;
  out[3] = (1.0 - now.tau_H - in_now.phi_H) -
           growth * (next.u_h / next.u_c * next.h_kH - next.p_ene * p.kappa_N +
                     (1.0 - p.delta_H) * (1.0 - next.tau_H - in_next.phi_H));
  out[4] = (1.0 - now.tau_E - in_now.phi_E) -
           growth * (next.p_ene * p.kappa_bar * p.k_bar / (in_next.k_E * in_next.k_E) +
                     (1.0 - p.delta_E) * (1.0 - next.tau_E - in_next.phi_E));
}

/// Smoothed Fischer-Burmeister function; zero iff a, b >= 0 and a*b = eps^2/2.
template <class T>
T fischer_burmeister(const T& a, const T& b, double eps) {
  using std::sqrt;
  return a + b - sqrt(a * a + b * b + eps * eps);
}

inline PeriodAllocation to_allocation(const PeriodInputs<double>& in, const PeriodValues<double>& v,
                                      const ModelParameters& p) {
  PeriodAllocation a;
  a.c = v.c;
  a.h = v.h;
  a.ene = v.ene_req;
  a.e = in.e;
  a.res = in.res;
  a.i_Y = v.i_Y / p.n;
  a.i_F = v.i_F / p.n;
  a.i_N = v.i_N / p.n;
  a.i_H = v.i_H;
  a.i_E = v.i_E;
  a.k_Y = in.K_Y / p.n;
  a.k_F = in.K_F / p.n;
  a.k_N = in.K_N / p.n;
  a.k_H = in.k_H;
  a.k_E = in.k_E;
  a.land = p.land_per_household();
  a.Y = v.Y;
  a.Z = v.Z;
  a.L = p.L_total;
  a.E = v.E;
  a.E_Y = in.E_Y;
  a.E_F = v.E_F;
  a.E_N = v.E_N;
  a.K_Y = in.K_Y;
  a.K_F = in.K_F;
  a.K_N = in.K_N;
  a.Res_F = in.Res_F;
  return a;
}

inline PriceSystem to_prices(const PeriodValues<double>& v) {
  return {v.p_E, v.p_F, v.p_N, v.p_ene, v.R, v.R_F, v.R_N, v.w};
}

/// Household multipliers implied by the period values (current-value units).
inline MultiplierSet to_multipliers(const PeriodInputs<double>& in, const PeriodValues<double>& v) {
  MultiplierSet m;
  m.lambda = v.u_c;
  m.chi = v.u_h;
  m.nu_e = m.nu_ene = v.u_c * v.p_ene;
  m.psi = m.psi_F = m.psi_N = v.u_c;
  m.phi_H = in.phi_H * v.u_c;
  m.phi_E = in.phi_E * v.u_c;
  m.psi_H = (1.0 - v.tau_H) * v.u_c - m.phi_H;
  m.psi_E = (1.0 - v.tau_E) * v.u_c - m.phi_E;
  m.chi_Y = v.u_c * v.p_E;
  m.chi_F = v.u_c * v.p_F;
  m.chi_N = v.u_c * v.p_N;
  m.chi_E = v.u_c * v.p_E;
  return m;
}

}  // namespace decarb::detail
