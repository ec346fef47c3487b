#include "decarb/steady_state.hpp"

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>

#include "decarb/economy.hpp"

namespace decarb {
namespace detail {

StationaryPrices stationary_prices(const ModelParameters& p, const StationaryPolicy& policy) {
  StationaryPrices pr{};
  pr.R = p.rho + p.delta_Y;
  pr.R_F = p.rho + p.delta_F;
  pr.R_N = p.rho + p.delta_N;
  pr.p_F = ces_unit_cost(p.a_F, pr.R_F, p.p_R + policy.p_C, p.sigma_F);
  pr.p_N = pr.R_N / p.A_N0;
  pr.p_E = ces_unit_cost(p.a_E, pr.p_F, pr.p_N, p.sigma_E);
  // unit cost of the final good equals one
  const double rest = 1.0 - std::pow(1.0 - p.a, p.sigma) * std::pow(pr.p_E, 1.0 - p.sigma);
  if (!(rest > 0.0)) throw InfeasibleError("electricity too expensive for a unit final-good cost");
  pr.p_Z = std::pow(rest / std::pow(p.a, p.sigma), 1.0 / (1.0 - p.sigma));
  // p_Z = (R/a_Z)^a_Z (w/(A_Y (1-a_Z)))^(1-a_Z)
  pr.w = p.A_Y0 * (1.0 - p.a_Z) *
         std::pow(pr.p_Z / std::pow(pr.R / p.a_Z, p.a_Z), 1.0 / (1.0 - p.a_Z));
  pr.p_res = p.p_R + policy.p_HC;
  pr.p_ene = ces_unit_cost(p.a_ene, pr.p_E, pr.p_res, p.sigma_ene);
  return pr;
}

IndustryQuantities final_good_block(const ModelParameters& p, const StationaryPrices& pr) {
  IndustryQuantities q{};
  q.K_Y = p.a_Z / (1.0 - p.a_Z) * pr.w / pr.R * p.L_total;
  q.Z = std::pow(q.K_Y, p.a_Z) * std::pow(p.A_Y0 * p.L_total, 1.0 - p.a_Z);
  q.Y = q.Z / (std::pow(p.a, p.sigma) * std::pow(pr.p_Z, -p.sigma));
  q.E_Y = std::pow(1.0 - p.a, p.sigma) * std::pow(pr.p_E, -p.sigma) * q.Y;
  return q;
}

void electricity_block(const ModelParameters& p, const StationaryPrices& pr, const StationaryPolicy& policy,
                       double household_electricity, IndustryQuantities& q) {
  q.E = q.E_Y + p.n * household_electricity;
  q.E_F = std::pow(p.a_E, p.sigma_E) * std::pow(pr.p_F / pr.p_E, -p.sigma_E) * q.E;
  q.E_N = std::pow(1.0 - p.a_E, p.sigma_E) * std::pow(pr.p_N / pr.p_E, -p.sigma_E) * q.E;
  q.K_N = q.E_N / p.A_N0;
  q.K_F = std::pow(p.a_F, p.sigma_F) * std::pow(pr.R_F / pr.p_F, -p.sigma_F) * q.E_F;
  q.Res_F = std::pow(1.0 - p.a_F, p.sigma_F) * std::pow((p.p_R + policy.p_C) / pr.p_F, -p.sigma_F) * q.E_F;
}

std::array<double, 2> energy_mix_per_unit(const ModelParameters& p, const StationaryPrices& pr) {
  const double s = p.sigma_ene;
  return {std::pow(p.a_ene, s) * std::pow(pr.p_E / pr.p_ene, -s),
          std::pow(1.0 - p.a_ene, s) * std::pow(pr.p_res / pr.p_ene, -s)};
}

}  // namespace detail

namespace {

template <class T>
std::array<T, 9> stationary_system(const std::array<T, 9>& lx, const ModelParameters& p,
                                   const StationaryPolicy& policy) {
  using std::exp;
  detail::PeriodInputs<T> in;
  in.K_Y = in.K_Y1 = exp(lx[0]);
  in.K_F = in.K_F1 = exp(lx[1]);
  in.K_N = in.K_N1 = exp(lx[2]);
  in.k_H = in.k_H1 = exp(lx[3]);
  in.k_E = in.k_E1 = exp(lx[4]);
  in.e = exp(lx[5]);
  in.res = exp(lx[6]);
  in.Res_F = exp(lx[7]);
  in.E_Y = exp(lx[8]);
  in.phi_H = in.phi_E = T(0.0);
  detail::PeriodExogenous<T> ex;
  ex.A_Y = p.A_Y0;
  ex.A_N = p.A_N0;
  ex.p_C = policy.p_C;
  ex.p_HC = policy.p_HC;
  ex.tau_E = policy.tau_E;
  ex.tau_H = policy.tau_H;
  const auto v = detail::evaluate_period(in, ex, p);
  std::array<T, 9> out;
  detail::euler_residuals(in, v, in, v, p, out.data());
  detail::static_residuals(in, v, p, out.data() + 5);
  return out;
}

double inf_norm(const std::array<double, 9>& r) {
  double m = 0.0;
  for (double x : r) m = std::max(m, std::abs(x));
  return m;
}

struct HouseholdPoint {
  double c, h;
  detail::IndustryQuantities q;
  double e, res, k_E;
};

/// Stationary quantities as a function of k_H alone (prices are pinned).
HouseholdPoint household_point(double k_H, const ModelParameters& p, const detail::StationaryPrices& pr,
                               const StationaryPolicy& policy, double k_E) {
  HouseholdPoint pt{};
  pt.k_E = k_E;
  const double ene = energy_requirement_value(k_E, k_H, p);
  const auto mix = detail::energy_mix_per_unit(p, pr);
  pt.e = mix[0] * ene;
  pt.res = mix[1] * ene;
  pt.q = detail::final_good_block(p, pr);
  detail::electricity_block(p, pr, policy, pt.e, pt.q);
  pt.c = (pt.q.Y - p.p_R * (p.n * pt.res + pt.q.Res_F) - p.delta_Y * pt.q.K_Y - p.delta_F * pt.q.K_F -
          p.delta_N * pt.q.K_N) / p.n -
         p.delta_H * k_H - p.delta_E * k_E - p.delta_H * p.k_bar;
  pt.h = housing_services_value(p.land_per_household(), k_H, p);
  return pt;
}

}  // namespace

std::array<double, 9> stationary_residuals(const std::array<double, 9>& x, const ModelParameters& p,
                                           const StationaryPolicy& policy) {
  return stationary_system(x, p, policy);
}

SteadyState solve_steady_state(const ModelParameters& p, const StationaryPolicy& policy,
                               const SteadyStateOptions& options) {
  p.validate();
  const detail::StationaryPrices pr = detail::stationary_prices(p, policy);
  const double k_E = std::sqrt(pr.p_ene * p.kappa_bar * p.k_bar / ((1.0 - policy.tau_E) * (p.rho + p.delta_E)));

  // housing condition: (u_h/u_c) h_kH - p_ene kappa_N = (1 - tau_H)(rho + delta_H)
  auto housing_gap = [&](double k_H) {
    const HouseholdPoint pt = household_point(k_H, p, pr, policy, k_E);
    const double mrs = (1.0 - p.phi) * pt.c / (p.phi * (pt.h - p.h_bar));
    return mrs * (1.0 - p.a_h) * pt.h / (p.k_bar + k_H) - pr.p_ene * p.kappa_N -
           (1.0 - policy.tau_H) * (p.rho + p.delta_H);
  };
  const double land = p.land_per_household();
  double lo = 0.0;
  if (housing_services_value(land, 0.0, p) <= p.h_bar) {
    lo = std::pow(p.h_bar / std::pow(land, p.a_h), 1.0 / (1.0 - p.a_h)) - p.k_bar;
    lo += 1e-12 * std::max(1.0, lo);
  }
  const double c_lo = household_point(lo, p, pr, policy, k_E).c;
  if (!(c_lo > 0.0))
    throw InfeasibleError("no stationary point: consumption is exhausted before housing exceeds h_bar");
  // consumption falls linearly in k_H; the housing condition turns negative before c reaches 0
  const double c_hi = household_point(lo + 1.0, p, pr, policy, k_E).c;
  const double slope = c_lo - c_hi;
  const double hi = lo + c_lo / slope * (1.0 - 1e-12);
  if (!(housing_gap(hi) < 0.0)) throw InfeasibleError("no stationary housing stock with positive consumption");
  double k_H = lo;
  if (housing_gap(lo) > 0.0) {
    boost::math::tools::eps_tolerance<double> tol(52);
    std::uintmax_t iters = 200;
    const auto bracket = boost::math::tools::toms748_solve(housing_gap, lo, hi, tol, iters);
    k_H = 0.5 * (bracket.first + bracket.second);
  }
  if (!(k_H > 0.0)) throw InfeasibleError("stationary housing capital is not positive");

  const HouseholdPoint pt = household_point(k_H, p, pr, policy, k_E);
  if (!(pt.h > p.h_bar)) throw InfeasibleError("stationary housing services at or below h_bar");
  std::array<double, 9> x = {std::log(pt.q.K_Y), std::log(pt.q.K_F), std::log(pt.q.K_N),
                             std::log(k_H),      std::log(k_E),      std::log(pt.e),
                             std::log(pt.res),   std::log(pt.q.Res_F), std::log(pt.q.E_Y)};

  // Newton polish with an exact Jacobian
  using D = Dual<9>;
  std::vector<double> history;
  SteadyState ss;
  Eigen::Matrix<double, 9, 9> J;
  Eigen::Matrix<double, 9, 1> F;
  int it = 0;
  for (;; ++it) {
    std::array<D, 9> xd;
    for (int i = 0; i < 9; ++i) xd[i] = D::variable(x[i], i);
    const auto r = stationary_system(xd, p, policy);
    for (int i = 0; i < 9; ++i) {
      F(i) = r[i].v;
      for (int j = 0; j < 9; ++j) J(i, j) = r[i].d[j];
    }
    const double norm = F.cwiseAbs().maxCoeff();
    history.push_back(norm);
    if (norm <= options.tolerance) break;
    if (it >= options.max_iterations) throw SolverError("steady-state Newton did not converge", history);
    const Eigen::Matrix<double, 9, 1> dx = J.partialPivLu().solve(-F);
    double step = 1.0;
    for (;;) {
      std::array<double, 9> trial = x;
      for (int i = 0; i < 9; ++i) trial[i] += step * dx(i);
      double trial_norm = std::numeric_limits<double>::infinity();
      try {
        trial_norm = inf_norm(stationary_system(trial, p, policy));
      } catch (const DomainError&) {
      }
      if (trial_norm < (1.0 - 1e-4 * step) * norm || step < 1e-10) {
        x = trial;
        break;
      }
      step *= 0.5;
    }
  }
  Eigen::JacobiSVD<Eigen::Matrix<double, 9, 9>> svd(J);
  ss.min_singular_value = svd.singularValues()(8);
  ss.residual_norm = history.back();
  ss.iterations = it;

  detail::PeriodInputs<double> in;
  in.K_Y = in.K_Y1 = std::exp(x[0]);
  in.K_F = in.K_F1 = std::exp(x[1]);
  in.K_N = in.K_N1 = std::exp(x[2]);
  in.k_H = in.k_H1 = std::exp(x[3]);
  in.k_E = in.k_E1 = std::exp(x[4]);
  in.e = std::exp(x[5]);
  in.res = std::exp(x[6]);
  in.Res_F = std::exp(x[7]);
  in.E_Y = std::exp(x[8]);
  in.phi_H = in.phi_E = 0.0;
  detail::PeriodExogenous<double> ex;
  ex.A_Y = p.A_Y0;
  ex.A_N = p.A_N0;
  ex.p_C = policy.p_C;
  ex.p_HC = policy.p_HC;
  ex.tau_E = policy.tau_E;
  ex.tau_H = policy.tau_H;
  const auto v = detail::evaluate_period(in, ex, p);
  ss.alloc = detail::to_allocation(in, v, p);
  ss.prices = detail::to_prices(v);
  ss.multipliers = detail::to_multipliers(in, v);
  ss.land_rent = v.u_h / v.u_c * p.a_h * v.h;
  ss.land_price = ss.land_rent / land / p.rho;
  return ss;
}

}  // namespace decarb
