#include "decarb/transition.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "decarb/economy.hpp"
#include "decarb/errors.hpp"

namespace decarb {
namespace {

using D = Dual<32>;
constexpr int NU = kUnknownsPerPeriod;
constexpr int kOwn = 5;
constexpr int kNext = kOwn + NU;
constexpr int kBorderSlot = kNext + NU;
static_assert(kBorderSlot + kMaxBorder <= 32);

/// Evaluation context shared by the residual and Jacobian assembly.
struct Context {
  const TransitionProblem& pb;
  int N;
  int nb;
  double eps;
  const std::vector<char>* active;  // exact complementarity: 1 = investment pinned at zero
};

bool in_window(int t, int begin, int end) { return t >= begin && t < end; }

template <class T>
detail::PeriodExogenous<T> exogenous(const Context& c, int t, const T* border) {
  using std::exp;
  const auto& pol = c.pb.policy;
  detail::PeriodExogenous<T> ex;
  ex.A_Y = c.pb.tech.A_Y[t];
  ex.A_N = c.pb.tech.A_N[t];
  ex.p_C = PolicyInstruments::at(pol.p_C, t);
  ex.p_HC = PolicyInstruments::at(pol.p_HC, t);
  ex.tau_E = PolicyInstruments::at(pol.tau_E, t);
  ex.tau_H = PolicyInstruments::at(pol.tau_H, t);
  const double beta = c.pb.params.beta();
  for (int k = 0; k < c.nb; ++k) {
    const BudgetConstraint& b = pol.budgets[k];
    if (!in_window(t, b.start, b.end)) continue;
    if (b.instrument == BudgetInstrument::CarbonPrice) {
      const T mu = exp(border[k]) * std::pow(beta, -(t - b.start));
      if (b.price_industry) ex.p_C_util += mu;
      if (b.price_housing) ex.p_HC_util += mu;
    } else {
      ex.tau_E += PolicyInstruments::at(b.shape, t) / (1.0 + exp(-border[k]));
    }
  }
  return ex;
}

template <class T>
detail::PeriodInputs<T> period_inputs(const Context& c, const T* prev, const T* own) {
  using std::exp;
  detail::PeriodInputs<T> in;
  if (prev) {
    in.K_Y = exp(prev[0]);
    in.K_F = exp(prev[1]);
    in.K_N = exp(prev[2]);
    in.k_H = exp(prev[3]);
    in.k_E = exp(prev[4]);
  } else {
    const StockVector& s = c.pb.initial;
    in.K_Y = s.K_Y;
    in.K_F = s.K_F;
    in.K_N = s.K_N;
    in.k_H = s.k_H;
    in.k_E = s.k_E;
  }
  in.K_Y1 = exp(own[0]);
  in.K_F1 = exp(own[1]);
  in.K_N1 = exp(own[2]);
  in.k_H1 = exp(own[3]);
  in.k_E1 = exp(own[4]);
  in.e = exp(own[5]);
  in.res = exp(own[6]);
  in.Res_F = exp(own[7]);
  in.E_Y = exp(own[8]);
  in.phi_H = own[9];
  in.phi_E = own[10];
  return in;
}

double stock_log(const StockVector& s, int j) {
  const double v[5] = {s.K_Y, s.K_F, s.K_N, s.k_H, s.k_E};
  return std::log(v[j]);
}

/// Residual block of period t. prev is null at t = 0, next is null at the
/// last period.
template <class T>
void period_block(const Context& c, int t, const T* prev, const T* own, const T* next, const T* border, T* out) {
  const ModelParameters& p = c.pb.params;
  const auto in = period_inputs(c, prev, own);
  const auto v = detail::evaluate_period(in, exogenous(c, t, border), p, t);
  if (next) {
    // own next-period stocks are the beginning-of-period stocks of t+1
    const auto in1 = period_inputs(c, own, next);
    const auto v1 = detail::evaluate_period(in1, exogenous(c, t + 1, border), p, t + 1);
    detail::euler_residuals(in, v, in1, v1, p, out);
  } else {
    for (int j = 0; j < 5; ++j) {
      if (c.pb.terminal == TerminalCondition::FixedStocks)
        out[j] = own[j] - stock_log(c.pb.terminal_stocks, j);
      else
        out[j] = prev ? own[j] - prev[j] : own[j] - stock_log(c.pb.initial, j);
    }
  }
  detail::static_residuals(in, v, p, out + 5);
  const T a_H = v.i_H / p.k_bar;
  const T a_E = v.i_E / p.k_bar;
  if (c.active) {
    out[9] = (*c.active)[2 * t] ? a_H : in.phi_H;
    out[10] = (*c.active)[2 * t + 1] ? a_E : in.phi_E;
  } else {
    out[9] = detail::fischer_burmeister(a_H, in.phi_H, c.eps);
    out[10] = detail::fischer_burmeister(a_E, in.phi_E, c.eps);
  }
}

double sector_weight_res(Sector s, double n) { return s == Sector::Industry ? 0.0 : n; }
double sector_weight_resF(Sector s) { return s == Sector::Housing ? 0.0 : 1.0; }

double budget_sum(const std::vector<double>& x, const BudgetConstraint& b, double n) {
  double S = 0.0;
  for (int t = b.sum_begin; t < b.sum_end; ++t)
    S += sector_weight_res(b.sector, n) * std::exp(x[NU * t + 6]) + sector_weight_resF(b.sector) * std::exp(x[NU * t + 7]);
  return S;
}

std::vector<double> residuals(const std::vector<double>& x, const Context& c) {
  const int N = c.N;
  std::vector<double> F(static_cast<size_t>(NU * N + c.nb));
  const double* border = x.data() + NU * N;
  for (int t = 0; t < N; ++t) {
    const double* prev = t > 0 ? &x[NU * (t - 1)] : nullptr;
    const double* next = t + 1 < N ? &x[NU * (t + 1)] : nullptr;
    period_block<double>(c, t, prev, &x[NU * t], next, border, &F[NU * t]);
  }
  for (int k = 0; k < c.nb; ++k) {
    const BudgetConstraint& b = c.pb.policy.budgets[k];
    F[NU * N + k] = std::log(budget_sum(x, b, c.pb.params.n)) - std::log(b.budget);
  }
  return F;
}

Eigen::SparseMatrix<double> jacobian(const std::vector<double>& x, const Context& c) {
  const int N = c.N;
  const int n = NU * N + c.nb;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(N) * NU * (kBorderSlot + c.nb) + 2 * N * c.nb);
  D loc[32];
  D out[NU];
  for (int t = 0; t < N; ++t) {
    const bool has_prev = t > 0;
    const bool has_next = t + 1 < N;
    for (int s = 0; s < 32; ++s) loc[s] = D(0.0);
    if (has_prev)
      for (int j = 0; j < 5; ++j) loc[j] = D::variable(x[NU * (t - 1) + j], j);
    for (int j = 0; j < NU; ++j) loc[kOwn + j] = D::variable(x[NU * t + j], kOwn + j);
    if (has_next)
      for (int j = 0; j < NU; ++j) loc[kNext + j] = D::variable(x[NU * (t + 1) + j], kNext + j);
    for (int k = 0; k < c.nb; ++k) loc[kBorderSlot + k] = D::variable(x[NU * N + k], kBorderSlot + k);
    period_block<D>(c, t, has_prev ? loc : nullptr, loc + kOwn, has_next ? loc + kNext : nullptr, loc + kBorderSlot, out);
    for (int r = 0; r < NU; ++r) {
      const int row = NU * t + r;
      auto add = [&](int slot, int col) {
        const double d = out[r].d[slot];
        if (d != 0.0) trip.emplace_back(row, col, d);
      };
      if (has_prev)
        for (int j = 0; j < 5; ++j) add(j, NU * (t - 1) + j);
      for (int j = 0; j < NU; ++j) add(kOwn + j, NU * t + j);
      if (has_next)
        for (int j = 0; j < NU; ++j) add(kNext + j, NU * (t + 1) + j);
      for (int k = 0; k < c.nb; ++k) add(kBorderSlot + k, NU * N + k);
    }
  }
  for (int k = 0; k < c.nb; ++k) {
    const BudgetConstraint& b = c.pb.policy.budgets[k];
    const double S = budget_sum(x, b, c.pb.params.n);
    for (int t = b.sum_begin; t < b.sum_end; ++t) {
      const double wr = sector_weight_res(b.sector, c.pb.params.n);
      const double wf = sector_weight_resF(b.sector);
      if (wr > 0.0) trip.emplace_back(NU * N + k, NU * t + 6, wr * std::exp(x[NU * t + 6]) / S);
      if (wf > 0.0) trip.emplace_back(NU * N + k, NU * t + 7, wf * std::exp(x[NU * t + 7]) / S);
    }
  }
  Eigen::SparseMatrix<double> J(n, n);
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double half_sq(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return 0.5 * s;
}

/// Residual vector or an empty vector if the point is outside the domain.
std::vector<double> try_residuals(const std::vector<double>& x, const Context& c) {
  try {
    auto F = residuals(x, c);
    for (double f : F)
      if (!std::isfinite(f)) return {};
    return F;
  } catch (const DomainError&) {
    return {};
  }
}

/// Damped Newton on one smoothing stage. Returns false on failure.
bool newton_stage(std::vector<double>& x, const Context& c, double tol, const SolverOptions& opt,
                  Diagnostics& diag, std::string& why) {
  std::vector<double> F = try_residuals(x, c);
  if (F.empty()) {
    why = "initial point outside the domain";
    return false;
  }
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;
  for (int it = 0;; ++it) {
    const double norm = inf_norm(F);
    diag.norm_history.push_back(norm);
    if (opt.verbose) std::fprintf(stderr, "  newton eps=%.1e it=%d |F|=%.3e\n", c.eps, it, norm);
    if (norm <= tol) return true;
    if (it >= opt.max_iterations) {
      why = "iteration limit reached";
      return false;
    }
    ++diag.iterations;
    const Eigen::SparseMatrix<double> J = jacobian(x, c);
    if (!analyzed) {
      lu.analyzePattern(J);
      analyzed = true;
    }
    lu.factorize(J);
    if (lu.info() != Eigen::Success) {
      lu.analyzePattern(J);
      lu.factorize(J);
      if (lu.info() != Eigen::Success) {
        why = "singular Newton step (try a larger smoothing eps or a better initial guess)";
        return false;
      }
    }
    Eigen::Map<const Eigen::VectorXd> Fv(F.data(), static_cast<Eigen::Index>(F.size()));
    const Eigen::VectorXd dx = lu.solve(-Fv);
    if (!dx.allFinite()) {
      why = "singular Newton step (try a larger smoothing eps or a better initial guess)";
      return false;
    }
    double biggest = 0.0;
    for (Eigen::Index i = 0; i < dx.size(); ++i) biggest = std::max(biggest, std::abs(dx(i)));
    double alpha = std::min(1.0, opt.max_log_step / std::max(biggest, 1e-300));
    const double f0 = half_sq(F);
    for (;;) {
      std::vector<double> trial = x;
      for (size_t i = 0; i < trial.size(); ++i) trial[i] += alpha * dx(static_cast<Eigen::Index>(i));
      std::vector<double> Ft = try_residuals(trial, c);
      if (!Ft.empty() && half_sq(Ft) <= (1.0 - 2e-4 * alpha) * f0) {
        x = std::move(trial);
        F = std::move(Ft);
        break;
      }
      alpha *= opt.backtrack;
      if (alpha < 1e-12) {
        why = "line search failed";
        return false;
      }
    }
  }
}

/// Irreversible investment over k_bar; which = 0 for housing, 1 for efficiency.
double investment_share(const std::vector<double>& x, const Context& c, int t, int which) {
  const ModelParameters& p = c.pb.params;
  const int j = 3 + which;
  const double k0 = t > 0 ? std::exp(x[NU * (t - 1) + j]) : (which == 0 ? c.pb.initial.k_H : c.pb.initial.k_E);
  const double delta = which == 0 ? p.delta_H : p.delta_E;
  return (std::exp(x[NU * t + j]) - (1.0 - delta) * k0) / p.k_bar;
}

std::vector<char> active_set_from(const std::vector<double>& x, const Context& c) {
  std::vector<char> act(2 * c.N, 0);
  for (int t = 0; t < c.N; ++t)
    for (int w = 0; w < 2; ++w) act[2 * t + w] = investment_share(x, c, t, w) <= x[NU * t + 9 + w];
  return act;
}

/// Exact complementarity pass. Returns true and updates x if a consistent
/// active set is found.
bool polish(std::vector<double>& x, Context c, const SolverOptions& opt, Diagnostics& diag) {
  std::vector<char> act = active_set_from(x, c);
  std::vector<double> y = x;
  c.active = &act;
  for (int round = 0; round < 5; ++round) {
    std::string why;
    if (!newton_stage(y, c, opt.tolerance, opt, diag, why)) return false;
    bool flipped = false;
    for (int t = 0; t < c.N; ++t) {
      for (int w = 0; w < 2; ++w) {
        char& a = act[2 * t + w];
        if (a && y[NU * t + 9 + w] < -1e-10) {
          a = 0;
          flipped = true;
        } else if (!a && investment_share(y, c, t, w) < -1e-10) {
          a = 1;
          flipped = true;
        }
      }
    }
    if (!flipped) {
      x = y;
      return true;
    }
  }
  return false;
}

void record_binding(const std::vector<double>& a, std::vector<std::pair<int, int>>& out) {
  int start = -1;
  for (int t = 0; t <= static_cast<int>(a.size()); ++t) {
    const bool bind = t < static_cast<int>(a.size()) && a[t] < 1e-9;
    if (bind && start < 0) start = t;
    if (!bind && start >= 0) {
      out.emplace_back(start, t - 1);
      start = -1;
    }
  }
}

double max_jacobian_fd_error(const std::vector<double>& x, const Context& c) {
  const Eigen::SparseMatrix<double> J = jacobian(x, c);
  const Eigen::MatrixXd Jd(J);
  double worst = 0.0;
  for (size_t j = 0; j < x.size(); ++j) {
    std::vector<double> xp = x, xm = x;
    const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
    xp[j] += h;
    xm[j] -= h;
    const auto Fp = residuals(xp, c);
    const auto Fm = residuals(xm, c);
    for (size_t i = 0; i < Fp.size(); ++i) {
      const double fd = (Fp[i] - Fm[i]) / (2.0 * h);
      const double an = Jd(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      worst = std::max(worst, std::abs(fd - an) / std::max(1.0, std::abs(an)));
    }
  }
  return worst;
}

Diagnostics evaluate_diagnostics(const Trajectory& tr, const TransitionProblem& pb) {
  Diagnostics d;
  const ModelParameters& p = pb.params;
  std::vector<double> aH(tr.periods), aE(tr.periods);
  for (int t = 0; t < tr.periods; ++t) {
    const auto& a = tr.alloc[t];
    const auto& pr = tr.prices[t];
    const auto& m = tr.multipliers[t];
    aH[t] = a.i_H / p.k_bar;
    aE[t] = a.i_E / p.k_bar;
    d.complementarity_max = std::max({d.complementarity_max, std::abs(aH[t] * m.phi_H / m.lambda),
                                      std::abs(aE[t] * m.phi_E / m.lambda)});
    const double elec = std::abs(a.E - a.E_Y - p.n * a.e) / a.E;
    const double ene = std::abs(ces(p.a_ene, a.e, a.res, p.sigma_ene) / a.ene - 1.0);
    const double bop =
        std::abs(a.Y - p.n * (a.c + a.i_Y + a.i_F + a.i_N + a.i_H + a.i_E + p.delta_H * p.k_bar) -
                 p.p_R * (p.n * a.res + a.Res_F)) / a.Y;
    d.market_clearing_max = std::max({d.market_clearing_max, elec, ene, bop});
    const double gov = tr.Gamma[t] + tr.tau_E[t] * a.i_E + tr.tau_H[t] * a.i_H - tr.p_C[t] * a.Res_F / p.n -
                       tr.p_HC[t] * a.res;
    const double income = (pr.w * a.L + pr.R * a.K_Y + pr.R_F * a.K_F + pr.R_N * a.K_N) / p.n;
    d.government_budget_max = std::max(d.government_budget_max, std::abs(gov) / income);
    const double spend = a.c + a.i_Y + a.i_F + a.i_N + (1.0 - tr.tau_H[t]) * a.i_H + (1.0 - tr.tau_E[t]) * a.i_E +
                         p.delta_H * p.k_bar + pr.p_E * a.e + (p.p_R + tr.p_HC[t]) * a.res;
    d.walras_max = std::max(d.walras_max, std::abs(spend - income - tr.Gamma[t]) / income);
  }
  record_binding(aH, d.binding_H);
  record_binding(aE, d.binding_E);
  for (const auto& b : pb.policy.budgets) {
    const double S = tr.total_emissions(b.sum_begin, b.sum_end, b.sector);
    d.budget_slack_max = std::max(d.budget_slack_max, std::abs(S / b.budget - 1.0));
  }
  return d;
}

}  // namespace

double fischer_burmeister(double a, double b, double eps) { return detail::fischer_burmeister(a, b, eps); }

void TransitionProblem::validate() const {
  params.validate();
  const int N = periods();
  if (static_cast<int>(tech.A_Y.size()) < N + 1 || static_cast<int>(tech.A_N.size()) < N + 1)
    throw ConfigError("technology paths shorter than the horizon");
  const double s[5] = {initial.K_Y, initial.K_F, initial.K_N, initial.k_H, initial.k_E};
  for (double v : s)
    if (!(v > 0.0)) throw ConfigError("initial stocks must be positive");
  if (terminal == TerminalCondition::FixedStocks) {
    const double f[5] = {terminal_stocks.K_Y, terminal_stocks.K_F, terminal_stocks.K_N, terminal_stocks.k_H,
                         terminal_stocks.k_E};
    for (double v : f)
      if (!(v > 0.0)) throw ConfigError("terminal stocks must be positive");
  }
  if (static_cast<int>(policy.budgets.size()) > kMaxBorder) throw ConfigError("too many budget constraints");
  for (const auto& b : policy.budgets) {
    if (!(b.budget > 0.0)) throw ConfigError("budget '" + b.name + "' must be positive");
    if (b.sum_begin < 0 || b.sum_end > N || b.sum_begin >= b.sum_end)
      throw ConfigError("budget '" + b.name + "' summation window outside the horizon");
    if (b.start < 0 || b.end > N || b.start >= b.end)
      throw ConfigError("budget '" + b.name + "' instrument window outside the horizon");
    if (b.instrument == BudgetInstrument::RetrofitSubsidy && static_cast<int>(b.shape.size()) < b.end)
      throw ConfigError("budget '" + b.name + "' subsidy shape shorter than its window");
    if (b.instrument == BudgetInstrument::CarbonPrice && !b.price_industry && !b.price_housing)
      throw ConfigError("budget '" + b.name + "' prices no sector");
  }
  if (mode == SolveMode::Planner) {
    if (policy.budgets.empty()) throw ConfigError("planner mode needs a budget constraint");
    for (const auto& b : policy.budgets)
      if (b.instrument != BudgetInstrument::CarbonPrice)
        throw ConfigError("planner mode prices every budget through its shadow value");
  }
  for (const auto* path : {&policy.p_C, &policy.p_HC})
    for (double v : *path)
      if (v < 0.0) throw ConfigError("carbon prices must be non-negative");
  for (double v : policy.tau_E)
    if (!(v < 1.0)) throw ConfigError("retrofit subsidy must be below one");
}

void SolverOptions::validate() const {
  if (!(tolerance > 0.0) || !(stage_tolerance > 0.0)) throw ConfigError("solver tolerances must be positive");
  if (max_iterations < 1) throw ConfigError("max_iterations must be positive");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw ConfigError("backtracking factor must lie in (0,1)");
  if (eps_schedule.empty()) throw ConfigError("smoothing schedule is empty");
  for (size_t i = 0; i < eps_schedule.size(); ++i) {
    if (i > 0 && !(eps_schedule[i] < eps_schedule[i - 1]))
      throw ConfigError("smoothing schedule must be strictly decreasing");
  }
  if (!(eps_schedule.back() >= 1e-10)) throw ConfigError("smoothing floor must be at least 1e-10");
}

double Trajectory::total_emissions(int begin, int end, Sector sector) const {
  double S = 0.0;
  for (int t = std::max(begin, 0); t < std::min(end, periods); ++t) {
    if (sector != Sector::Industry) S += emissions_housing[t];
    if (sector != Sector::Housing) S += emissions_industry[t];
  }
  return S;
}

std::vector<double> assemble_residuals(const std::vector<double>& x, const TransitionProblem& problem, double eps) {
  const int N = problem.periods();
  const int nb = static_cast<int>(problem.policy.budgets.size());
  if (static_cast<int>(x.size()) != NU * N + nb) throw ConfigError("unknown vector does not match the problem");
  Context c{problem, N, nb, eps, nullptr};
  return residuals(x, c);
}

std::vector<double> assemble_residuals(const Trajectory& traj, const TransitionProblem& problem, double eps) {
  return assemble_residuals(traj.x, problem, eps);
}

StockVector stocks_of(const SteadyState& ss) {
  return {ss.alloc.K_Y, ss.alloc.K_F, ss.alloc.K_N, ss.alloc.k_H, ss.alloc.k_E};
}

Trajectory replicate_steady_state(const TransitionProblem& problem, const SteadyState& ss) {
  const int N = problem.periods();
  Trajectory g;
  g.periods = N;
  const auto& a = ss.alloc;
  const double blk[NU] = {std::log(a.K_Y), std::log(a.K_F), std::log(a.K_N), std::log(a.k_H), std::log(a.k_E),
                          std::log(a.e),   std::log(a.res), std::log(a.Res_F), std::log(a.E_Y), 0.0, 0.0};
  for (int t = 0; t < N; ++t) g.x.insert(g.x.end(), blk, blk + NU);
  for (const auto& b : problem.policy.budgets) {
    g.border.push_back(b.level_guess);
    g.x.push_back(b.level_guess);
  }
  return g;
}

Trajectory adapt_guess(const Trajectory& guess, const TransitionProblem& problem) {
  const int N = problem.periods();
  const int nb = static_cast<int>(problem.policy.budgets.size());
  const int size = static_cast<int>(guess.x.size());
  const int old_N = guess.periods > 0 ? guess.periods : (size - static_cast<int>(guess.border.size())) / NU;
  const int old_nb = size - NU * old_N;
  if (old_N < 1 || old_nb < 0 || old_nb > kMaxBorder) throw ConfigError("initial guess has no usable raw unknowns");
  Trajectory g;
  g.periods = N;
  g.x.resize(static_cast<size_t>(NU * N + nb));
  for (int t = 0; t < N; ++t) {
    const int src = std::min(t, old_N - 1);
    std::copy_n(guess.x.begin() + NU * src, NU, g.x.begin() + NU * t);
  }
  for (int k = 0; k < nb; ++k) {
    const double v = old_nb == nb && static_cast<int>(guess.border.size()) == nb ? guess.border[k]
                                                                         : problem.policy.budgets[k].level_guess;
    g.x[NU * N + k] = v;
    g.border.push_back(v);
  }
  return g;
}

Trajectory build_trajectory(const std::vector<double>& x, const TransitionProblem& problem) {
  const int N = problem.periods();
  const int nb = static_cast<int>(problem.policy.budgets.size());
  const ModelParameters& p = problem.params;
  Context c{problem, N, nb, 0.0, nullptr};
  Trajectory tr;
  tr.periods = N;
  tr.x = x;
  tr.border.assign(x.begin() + NU * N, x.end());
  const double* border = x.data() + NU * N;
  const double beta = p.beta();
  for (int t = 0; t < N; ++t) {
    const double* prev = t > 0 ? &x[NU * (t - 1)] : nullptr;
    const auto in = period_inputs<double>(c, prev, &x[NU * t]);
    const auto ex = exogenous<double>(c, t, border);
    const auto v = detail::evaluate_period(in, ex, p, t);
    tr.alloc.push_back(detail::to_allocation(in, v, p));
    tr.prices.push_back(detail::to_prices(v));
    MultiplierSet m = detail::to_multipliers(in, v);
    m.mu_R = std::max(ex.p_C_util, ex.p_HC_util);
    tr.multipliers.push_back(m);
    tr.p_C.push_back(v.p_C);
    tr.p_HC.push_back(v.p_HC);
    tr.tau_E.push_back(v.tau_E);
    tr.tau_H.push_back(v.tau_H);
    tr.mu_C.push_back(ex.p_C_util);
    tr.mu_HC.push_back(ex.p_HC_util);
    tr.Gamma.push_back(v.p_C * in.Res_F / p.n + v.p_HC * in.res - v.tau_E * v.i_E - v.tau_H * v.i_H);
    tr.emissions_industry.push_back(in.Res_F);
    tr.emissions_housing.push_back(p.n * in.res);
    tr.welfare_flow.push_back(utility(v.c, v.h, p).u);
  }
  // multiplier of the non-negativity of the remaining budget: zero except at
  // the first period after a pricing window closes
  for (int t = 1; t < N; ++t) {
    const double prev_mu = tr.multipliers[t - 1].mu_R;
    const double grown = prev_mu / beta;
    tr.multipliers[t].mu = std::max(0.0, grown - tr.multipliers[t].mu_R);
    if (std::abs(tr.multipliers[t].mu) <= 1e-12 * std::max(1.0, grown)) tr.multipliers[t].mu = 0.0;
  }
  tr.terminal = {std::exp(x[NU * (N - 1)]), std::exp(x[NU * (N - 1) + 1]), std::exp(x[NU * (N - 1) + 2]),
                 std::exp(x[NU * (N - 1) + 3]), std::exp(x[NU * (N - 1) + 4])};

  // remaining budget over the summation window
  int window_end = 0;
  for (const auto& b : problem.policy.budgets) window_end = std::max(window_end, b.sum_end);
  double M0 = problem.M0;
  if (!std::isfinite(M0) && !problem.policy.budgets.empty()) {
    M0 = 0.0;
    for (const auto& b : problem.policy.budgets) M0 += b.budget;
  }
  tr.M.assign(N + 1, std::numeric_limits<double>::infinity());
  if (std::isfinite(M0)) {
    tr.M[0] = M0;
    for (int t = 0; t < N; ++t)
      tr.M[t + 1] = t < window_end ? tr.M[t] - tr.emissions_industry[t] - tr.emissions_housing[t] : tr.M[t];
  }
  return tr;
}

TransitionResult solve_transition(const TransitionProblem& problem, const SolverOptions& options,
                                  const Trajectory& initial_guess) {
  problem.validate();
  options.validate();
  const int N = problem.periods();
  const int nb = static_cast<int>(problem.policy.budgets.size());
  std::vector<double> x = adapt_guess(initial_guess, problem).x;
  Diagnostics diag;
  Context c{problem, N, nb, options.eps_schedule.front(), nullptr};
  for (size_t s = 0; s < options.eps_schedule.size(); ++s) {
    c.eps = options.eps_schedule[s];
    const bool last = s + 1 == options.eps_schedule.size();
    std::string why;
    if (!newton_stage(x, c, last ? options.tolerance : options.stage_tolerance, options, diag, why)) {
      char msg[160];
      std::snprintf(msg, sizeof msg, "transition solve failed at smoothing eps=%.1e: %s", c.eps, why.c_str());
      throw SolverError(msg, diag.norm_history, x);
    }
  }
  diag.eps_final = c.eps;
  if (options.polish) {
    Diagnostics scratch;
    if (polish(x, c, options, scratch)) {
      diag.polished = true;
      diag.eps_final = 0.0;
      diag.iterations += scratch.iterations;
      diag.norm_history.insert(diag.norm_history.end(), scratch.norm_history.begin(), scratch.norm_history.end());
    }
  }
  if (options.check_jacobian) diag.jacobian_fd_error = max_jacobian_fd_error(x, c);

  TransitionResult out;
  out.trajectory = build_trajectory(x, problem);
  Diagnostics post = evaluate_diagnostics(out.trajectory, problem);
  post.converged = true;
  post.iterations = diag.iterations;
  post.norm_history = diag.norm_history;
  post.final_norm = diag.norm_history.back();
  post.eps_final = diag.eps_final;
  post.polished = diag.polished;
  post.jacobian_fd_error = diag.jacobian_fd_error;
  out.diagnostics = post;
  return out;
}

TransitionResult solve_with_technology_homotopy(const TransitionProblem& problem, const SolverOptions& options,
                                                const Trajectory& frozen_guess) {
  const TechnologyPaths full = problem.tech;
  const double AY0 = full.A_Y.front(), AN0 = full.A_N.front();
  auto scaled = [&](double s) {
    TechnologyPaths t = full;
    for (size_t i = 0; i < t.A_Y.size(); ++i) {
      t.A_Y[i] = AY0 * std::pow(full.A_Y[i] / AY0, s);
      t.A_N[i] = AN0 * std::pow(full.A_N[i] / AN0, s);
    }
    return t;
  };
  TransitionProblem stage = problem;
  SolverOptions coarse = options;
  coarse.polish = false;
  coarse.check_jacobian = false;
  Trajectory guess = frozen_guess;
  double s = 0.0, ds = 0.25;
  while (s < 1.0) {
    const double target = std::min(1.0, s + ds);
    stage.tech = scaled(target);
    try {
      guess = solve_transition(stage, coarse, guess).trajectory;
      s = target;
      ds = std::min(0.5, ds * 1.5);
    } catch (const SolverError&) {
      ds *= 0.5;
      if (ds < 1.0 / 256.0) throw;
    }
  }
  return solve_transition(problem, options, guess);
}

Decentralization decentralize(const Trajectory& planner, const TransitionProblem& problem,
                              const SolverOptions& options, double tolerance) {
  const int N = problem.periods();
  Decentralization d;
  d.instruments.p_C = planner.p_C;
  d.instruments.p_HC = planner.p_HC;
  d.instruments.tau_E = planner.tau_E;
  d.instruments.tau_H = planner.tau_H;
  d.tau.resize(N);
  for (int t = 0; t < N; ++t) d.tau[t] = planner.p_C[t] / problem.params.p_R;
  TransitionProblem dec = problem;
  dec.policy = d.instruments;
  dec.mode = SolveMode::Decentralized;
  Trajectory guess;
  guess.periods = N;
  guess.x.assign(planner.x.begin(), planner.x.begin() + NU * N);
  d.resolved = solve_transition(dec, options, guess);
  const auto& A = planner.alloc;
  const auto& B = d.resolved.trajectory.alloc;
  auto gap = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(a)); };
  for (int t = 0; t < N; ++t) {
    d.max_relative_gap = std::max({d.max_relative_gap, gap(A[t].c, B[t].c), gap(A[t].K_Y, B[t].K_Y),
                                   gap(A[t].K_F, B[t].K_F), gap(A[t].K_N, B[t].K_N), gap(A[t].k_H, B[t].k_H),
                                   gap(A[t].k_E, B[t].k_E), gap(A[t].e, B[t].e), gap(A[t].res, B[t].res),
                                   gap(A[t].Res_F, B[t].Res_F), gap(A[t].E_Y, B[t].E_Y)});
  }
  if (d.max_relative_gap > tolerance) {
    char msg[160];
    std::snprintf(msg, sizeof msg, "decentralized re-solve departs from the planner allocation by %.3e", d.max_relative_gap);
    throw ConsistencyError(msg);
  }
  return d;
}

void save_checkpoint(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint '" + path + "'");
  auto num = [](double v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
  };
  out << "# transition checkpoint\n";
  out << "periods = " << traj.periods << "\n";
  out << "unknowns_per_period = " << NU << "\n";
  out << "border_count = " << traj.border.size() << "\n";
  for (size_t i = 0; i < traj.x.size(); ++i) out << "x." << i << " = " << num(traj.x[i]) << "\n";
  if (!out) throw IoError("failed writing checkpoint '" + path + "'");
}

Trajectory load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read checkpoint '" + path + "'");
  Trajectory tr;
  size_t border_count = 0;
  std::vector<std::pair<size_t, double>> values;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError("checkpoint line " + std::to_string(lineno) + " has no '='");
    std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    key.erase(key.find_last_not_of(' ') + 1);
    val.erase(0, val.find_first_not_of(' '));
    double v = 0.0;
    const auto r = std::from_chars(val.data(), val.data() + val.size(), v);
    if (r.ec != std::errc()) throw IoError("checkpoint line " + std::to_string(lineno) + ": bad number");
    if (key == "periods") tr.periods = static_cast<int>(v);
    else if (key == "unknowns_per_period") {
      if (static_cast<int>(v) != NU) throw IoError("checkpoint layout does not match this build");
    } else if (key == "border_count") border_count = static_cast<size_t>(v);
    else if (key.rfind("x.", 0) == 0) values.emplace_back(std::stoul(key.substr(2)), v);
    else throw IoError("checkpoint line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  const size_t n = static_cast<size_t>(tr.periods) * NU + border_count;
  if (values.size() != n) throw IoError("checkpoint holds " + std::to_string(values.size()) + " values, expected " + std::to_string(n));
  tr.x.assign(n, 0.0);
  for (const auto& [i, v] : values) {
    if (i >= n) throw IoError("checkpoint index out of range");
    tr.x[i] = v;
  }
  tr.border.assign(tr.x.end() - static_cast<long>(border_count), tr.x.end());
  return tr;
}

}  // namespace decarb
