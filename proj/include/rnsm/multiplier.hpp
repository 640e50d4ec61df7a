#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "field.hpp"

namespace rnsm {

enum class SymbolFamily { fractional_laplacian, helmholtz_power, fractional_helmholtz, rational };

inline std::string to_string(SymbolFamily f) {
  switch (f) {
    case SymbolFamily::fractional_laplacian: return "fractional-laplacian";
    case SymbolFamily::helmholtz_power: return "helmholtz-power";
    case SymbolFamily::fractional_helmholtz: return "fractional-helmholtz";
    case SymbolFamily::rational: return "rational";
  }
  return "?";
}

inline SymbolFamily symbol_family_from(const std::string& s) {
  if (s == "fractional-laplacian") return SymbolFamily::fractional_laplacian;
  if (s == "helmholtz-power") return SymbolFamily::helmholtz_power;
  if (s == "fractional-helmholtz") return SymbolFamily::fractional_helmholtz;
  if (s == "rational") return SymbolFamily::rational;
  throw std::invalid_argument("unknown multiplier family '" + s + "'");
}

// Scalar Fourier multiplier. The coefficient scales every family; it is 1
// except for the dissipation operator, where it carries nu or eta.
//   fractional-laplacian   c |k|^{2e}
//   helmholtz-power        c (1 + a^2|k|^2)^e
//   fractional-helmholtz   c (1 + (a^2|k|^2)^e)^{-1}
//   rational               c |k|^2 / (1 + a^2|k|^2)
struct MultiplierSpec {
  SymbolFamily family = SymbolFamily::helmholtz_power;
  double exponent = 0;
  double alpha = 0;
  double coefficient = 1;

  static MultiplierSpec identity() { return {}; }
  static MultiplierSpec laplacian_power(double e, double c = 1) {
    return {SymbolFamily::fractional_laplacian, e, 0, c};
  }
  // (I - a^2 Delta)^e; e = -1 is the Helmholtz filter.
  static MultiplierSpec helmholtz(double e, double a) {
    return {SymbolFamily::helmholtz_power, e, a, 1};
  }
  static MultiplierSpec fractional_helmholtz(double e, double a) {
    return {SymbolFamily::fractional_helmholtz, e, a, 1};
  }
  static MultiplierSpec voigt(double a, double c) { return {SymbolFamily::rational, 1, a, c}; }

  bool is_identity() const {
    return family == SymbolFamily::helmholtz_power && coefficient == 1 &&
           (exponent == 0 || alpha == 0);
  }

  double operator()(double k2) const {
    const double a2k2 = alpha * alpha * k2;
    switch (family) {
      case SymbolFamily::fractional_laplacian:
        return k2 == 0 ? (exponent == 0 ? coefficient : 0.0) : coefficient * std::pow(k2, exponent);
      case SymbolFamily::helmholtz_power:
        return coefficient * std::pow(1 + a2k2, exponent);
      case SymbolFamily::fractional_helmholtz:
        return coefficient / (1 + (a2k2 == 0 ? 0.0 : std::pow(a2k2, exponent)));
      case SymbolFamily::rational:
        return coefficient * k2 / (1 + a2k2);
    }
    return 0;
  }

  // Symbol on every stored mode; modes outside the retained set get 0.
  std::vector<double> table(const Grid& g) const {
    std::vector<double> t(g.spectral_size(), 0.0);
    for (std::size_t i = 0; i < t.size(); ++i)
      if (g.retained(i)) t[i] = (*this)(g.k2(i));
    return t;
  }

  bool operator==(const MultiplierSpec&) const = default;
};

// What the caller expects of the symbol; checked on the retained lattice.
enum class OperatorRole { any, dissipation, smoothing };

inline void validate(const MultiplierSpec& s, const Grid& g, OperatorRole role) {
  if (s.alpha < 0) throw std::invalid_argument("multiplier alpha must be nonnegative");
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    if (!g.retained(i)) continue;
    const double a = s(g.k2(i));
    if (!std::isfinite(a))
      throw std::invalid_argument(to_string(s.family) + " symbol is not finite on the lattice");
    if (role == OperatorRole::dissipation && a < 0)
      throw std::invalid_argument(to_string(s.family) +
                                  " symbol is negative; not usable as a dissipation operator");
    if (role == OperatorRole::smoothing && !(a > 0))
      throw std::invalid_argument(to_string(s.family) +
                                  " symbol is not positive; not usable as a smoothing operator");
  }
}

inline Field apply_multiplier(const MultiplierSpec& s, const Field& v,
                              OperatorRole role = OperatorRole::any) {
  if (role != OperatorRole::any) validate(s, v.grid(), role);
  if (s.is_identity()) return v;
  Field out = v;
  const Grid& g = v.grid();
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    const double a = g.k2(i) > 0 ? s(g.k2(i)) : 0.0;
    for (int c = 0; c < out.dims(); ++c) out[c][i] *= a;
  }
  return out;
}

}  // namespace rnsm
