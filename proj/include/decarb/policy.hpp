#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace decarb {

enum class Sector { Total, Industry, Housing };

enum class BudgetInstrument {
  CarbonPrice,     ///< Hotelling price mu*beta^-(t-start)/u_c(t), level mu = exp(b)
  RetrofitSubsidy  ///< tau_E(t) = logistic(b) * shape(t)
};

/// A cumulative emission constraint together with the instrument whose level
/// is adjusted so that the constraint binds. The level is an extra unknown of
/// the transition system.
struct BudgetConstraint {
  std::string name = "budget";
  Sector sector = Sector::Total;
  double budget = 0.0;  ///< target for the emissions summed over [sum_begin, sum_end)
  int sum_begin = 0;
  int sum_end = 0;
  BudgetInstrument instrument = BudgetInstrument::CarbonPrice;
  bool price_industry = true;  ///< CarbonPrice: applies to the industry price p_C
  bool price_housing = true;   ///< CarbonPrice: applies to the housing price p_HC
  int start = 0;               ///< first period the instrument acts
  int end = 0;                 ///< one past the last period the instrument acts
  std::vector<double> shape;   ///< RetrofitSubsidy: per-period shape in [0,1]
  double level_guess = 0.0;    ///< initial value of the level unknown
};

/// Exogenous instrument paths (empty vectors mean zero) plus budget-linked
/// instruments. All prices are in final-good units per resource unit.
struct PolicyInstruments {
  std::vector<double> p_C;
  std::vector<double> p_HC;
  std::vector<double> tau_E;
  std::vector<double> tau_H;
  std::vector<double> cap_HC;  ///< upper bounds on p_HC where a cap is in force (record only)
  std::vector<BudgetConstraint> budgets;

  static double at(const std::vector<double>& path, int t) {
    return t < static_cast<int>(path.size()) ? path[t] : 0.0;
  }
};

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace decarb
