#include "decarb/params.hpp"

#include <cmath>
#include <utility>

#include "decarb/errors.hpp"

namespace decarb {
namespace {

using Member = double ModelParameters::*;

const std::vector<std::pair<std::string, Member>>& registry() {
  static const std::vector<std::pair<std::string, Member>> fields = {
      {"a", &ModelParameters::a},
      {"sigma", &ModelParameters::sigma},
      {"a_Z", &ModelParameters::a_Z},
      {"A_Y0", &ModelParameters::A_Y0},
      {"a_E", &ModelParameters::a_E},
      {"sigma_E", &ModelParameters::sigma_E},
      {"a_F", &ModelParameters::a_F},
      {"sigma_F", &ModelParameters::sigma_F},
      {"A_N0", &ModelParameters::A_N0},
      {"phi", &ModelParameters::phi},
      {"h_bar", &ModelParameters::h_bar},
      {"a_h", &ModelParameters::a_h},
      {"a_ene", &ModelParameters::a_ene},
      {"sigma_ene", &ModelParameters::sigma_ene},
      {"kappa_N", &ModelParameters::kappa_N},
      {"kappa_bar", &ModelParameters::kappa_bar},
      {"eta", &ModelParameters::eta},
      {"rho", &ModelParameters::rho},
      {"delta_Y", &ModelParameters::delta_Y},
      {"delta_F", &ModelParameters::delta_F},
      {"delta_N", &ModelParameters::delta_N},
      {"delta_H", &ModelParameters::delta_H},
      {"delta_E", &ModelParameters::delta_E},
      {"Land", &ModelParameters::Land},
      {"k_bar", &ModelParameters::k_bar},
      {"k0E_ratio", &ModelParameters::k0E_ratio},
      {"a_Y", &ModelParameters::a_Y},
      {"b_Y", &ModelParameters::b_Y},
      {"g_N", &ModelParameters::g_N},
      {"n", &ModelParameters::n},
      {"L_total", &ModelParameters::L_total},
      {"p_R", &ModelParameters::p_R},
  };
  return fields;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError("invalid parameters: " + msg);
}

bool open_unit(double x) { return x > 0.0 && x < 1.0; }
bool closed_unit(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

void ModelParameters::validate() const {
  for (const auto& [name, member] : registry())
    require(std::isfinite(this->*member), name + " is not finite");
  for (auto [name, v] : {std::pair{"a", a}, {"a_Z", a_Z}, {"a_E", a_E}, {"a_F", a_F},
                         {"phi", phi}, {"a_h", a_h}, {"a_ene", a_ene}})
    require(open_unit(v), std::string(name) + " must lie in (0,1)");
  for (auto [name, v] : {std::pair{"sigma", sigma}, {"sigma_E", sigma_E}, {"sigma_F", sigma_F},
                         {"sigma_ene", sigma_ene}, {"eta", eta}, {"rho", rho}})
    require(v > 0.0, std::string(name) + " must be positive");
  for (auto [name, v] : {std::pair{"delta_Y", delta_Y}, {"delta_F", delta_F}, {"delta_N", delta_N},
                         {"delta_H", delta_H}, {"delta_E", delta_E}})
    require(closed_unit(v), std::string(name) + " must lie in [0,1]");
  require(h_bar >= 0.0, "h_bar must be non-negative");
  require(kappa_N > 0.0 && kappa_bar > 0.0, "energy intensities must be positive");
  require(Land > 0.0 && k_bar > 0.0 && k0E_ratio > 0.0, "endowments must be positive");
  require(A_Y0 > 0.0 && A_N0 > 0.0, "initial productivities must be positive");
  require(a_Y > 0.0 && b_Y > 0.0, "a_Y and b_Y must be positive");
  require(g_N >= 0.0 && g_N < 1.0, "g_N must lie in [0,1)");
  require(n > 0.0 && L_total > 0.0 && p_R > 0.0, "normalizations must be positive");
  require(T >= 1, "horizon T must be at least 1");
}

void ModelParameters::set(std::string_view name, double value) {
  if (name == "T") {
    if (value < 1.0 || value != std::floor(value)) throw ConfigError("T must be a positive integer");
    T = static_cast<int>(value);
    return;
  }
  for (const auto& [key, member] : registry()) {
    if (key == name) {
      this->*member = value;
      return;
    }
  }
  throw ConfigError("unknown parameter '" + std::string(name) + "'");
}

double ModelParameters::get(std::string_view name) const {
  if (name == "T") return T;
  for (const auto& [key, member] : registry())
    if (key == name) return this->*member;
  throw ConfigError("unknown parameter '" + std::string(name) + "'");
}

const std::vector<std::string>& ModelParameters::field_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& entry : registry()) out.push_back(entry.first);
    out.push_back("T");
    return out;
  }();
  return names;
}

ModelParameters table1_parameters() { return ModelParameters{}; }

}  // namespace decarb
