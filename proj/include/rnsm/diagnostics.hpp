#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>
#include <string>
#include <vector>

#include "timestepper.hpp"

namespace rnsm {

// Long-time quantities are approximated on the trailing half of a record.
// Samples are uniform in time, so trapezoid weights reduce to halving the
// two end points.
inline std::size_t trailing_start(std::size_t n) { return n / 2; }

inline double trapezoid_mean(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  if (hi <= lo) throw std::invalid_argument("empty averaging window");
  if (hi - lo == 1) return v[lo];
  double s = 0.5 * (v[lo] + v[hi - 1]);
  for (std::size_t i = lo + 1; i + 1 < hi; ++i) s += v[i];
  return s / static_cast<double>(hi - lo - 1);
}

struct WindowAverage {
  double value = 0;
  double first_half = 0;
  double second_half = 0;
  bool stable = true;
};

// Average over the trailing half, with the two quarter-length halves of that
// window compared to 5%. An average of exact zeros counts as stable.
inline WindowAverage trailing_average(const std::vector<double>& v) {
  if (v.size() < 4) throw std::invalid_argument("need at least 4 samples for a trailing average");
  const std::size_t lo = trailing_start(v.size()), hi = v.size(), mid = lo + (hi - lo) / 2;
  WindowAverage w;
  w.value = trapezoid_mean(v, lo, hi);
  w.first_half = trapezoid_mean(v, lo, mid + 1);
  w.second_half = trapezoid_mean(v, mid, hi);
  const double scale = std::max(std::abs(w.first_half), std::abs(w.second_half));
  w.stable = scale == 0 || std::abs(w.first_half - w.second_half) <= 0.05 * scale;
  return w;
}

// limsup_t ||f(t)||_{-theta-theta2}, realized as the sup over the trailing
// half of the history. theta and theta2 only name the order the history was
// measured in; they are checked for finiteness.
inline double grashof_general(const std::vector<double>& f_norm_history, double theta,
                              double theta2) {
  if (f_norm_history.empty()) throw std::invalid_argument("empty forcing-norm history");
  if (!std::isfinite(theta) || !std::isfinite(theta2))
    throw std::invalid_argument("non-finite model exponents");
  return *std::max_element(f_norm_history.begin() + trailing_start(f_norm_history.size()),
                           f_norm_history.end());
}

inline double grashof_general(const TrajectoryRecord& r, double theta, double theta2) {
  return grashof_general(r.series("forcing_norm"), theta, theta2);
}

// Dimensional Navier-Stokes Grashof number L^{2-n/2}/(rho nu^2) ||f~||_{-1}
// for a body force f~ on the box of side L.
inline double grashof_nse(const Field& f_dim, double rho, double nu) {
  if (!(rho > 0) || !(nu > 0)) throw std::invalid_argument("rho and nu must be positive");
  const Grid& g = f_dim.grid();
  return std::pow(g.length(), 2 - 0.5 * g.dims()) / (rho * nu * nu) * homogeneous_norm(f_dim, -1);
}

// The nondimensional forcing L^2/(rho nu^2) f~ whose generalized Grashof
// number at (theta, theta2) = (1, 0) is grashof_nse.
inline Field nondimensional_forcing(const Field& f_dim, double rho, double nu) {
  const double L = f_dim.grid().length();
  return (L * L / (rho * nu * nu)) * f_dim;
}

struct RunScales {
  double nu = 0;
  double l = 1;  // forcing length scale
  double L = 2 * M_PI;
  int n = 2;
};

inline RunScales run_scales(const ModelParams& p, const ForcingSpec& f, const Grid& g) {
  return {p.nu, f.length_scale(g.length()), g.length(), g.dims()};
}

// The two velocity orders the Reynolds estimate reads: -2 max(theta1,theta2)
// and 1 - 2 max(theta1,theta2). Request them through IntegrateOptions.
inline std::vector<double> reynolds_orders(double theta1, double theta2) {
  const double t = std::max(theta1, theta2);
  return {0.0 - 2 * t, 1 - 2 * t};  // 0.0 - 0 is +0, so the column name has no sign
}

struct ReynoldsEstimate {
  double Re = 0;
  double eps = 0;
  double U = 0;
  double U2 = 0;
  bool stable = true;
  WindowAverage u_avg, grad_avg;
};

// U^2 = L^{-n} avg ||u||^2_{-2t}, eps = nu L^{-n} avg ||u||^2_{1-2t},
// Re = U l / nu, with t = max(theta1, theta2). The norms are the
// inhomogeneous ones of the record; at t = 0 the first is exactly ||u||_0^2.
inline ReynoldsEstimate reynolds_and_dissipation(const TrajectoryRecord& r, double theta1,
                                                 double theta2, const RunScales& sc) {
  if (!(sc.nu > 0)) throw std::invalid_argument("Reynolds number needs nu > 0");
  const auto orders = reynolds_orders(theta1, theta2);
  const double vol = std::pow(sc.L, -sc.n);
  ReynoldsEstimate e;
  e.u_avg = trailing_average(r.series(norm_column(orders[0])));
  e.grad_avg = trailing_average(r.series(norm_column(orders[1])));
  e.U2 = vol * e.u_avg.value;
  e.U = std::sqrt(std::max(0.0, e.U2));
  e.eps = sc.nu * vol * e.grad_avg.value;
  e.Re = e.U * sc.l / sc.nu;
  e.stable = e.u_avg.stable && e.grad_avg.stable;
  return e;
}

inline double kolmogorov_exponent(double theta, double theta1) {
  if (theta + theta1 == 0) throw std::invalid_argument("kolmogorov bound needs theta + theta1 != 0");
  return 0.25 * (2 + 1 / (theta + theta1));
}

// Shape of the bound on the inverse dissipation length, constant 1.
inline double kolmogorov_bound(double Re, double theta, double theta1) {
  const double e = kolmogorov_exponent(theta, theta1);
  if (Re < 0) throw std::invalid_argument("Reynolds number must be nonnegative");
  return std::pow(Re, e) + std::sqrt(Re);
}

enum class DeterminingRegime { dissipative, nondissipative };

inline std::string to_string(DeterminingRegime r) {
  return r == DeterminingRegime::dissipative ? "dissipative" : "nondissipative";
}

inline DeterminingRegime determining_regime_from(const std::string& s) {
  if (s == "dissipative") return DeterminingRegime::dissipative;
  if (s == "nondissipative") return DeterminingRegime::nondissipative;
  throw std::invalid_argument("unknown determining regime '" + s + "'");
}

inline double determining_mode_exponent(int n, double theta, double theta2, double alpha,
                                        DeterminingRegime r) {
  if (n != 2 && n != 3) throw std::invalid_argument("dimension must be 2 or 3");
  if (r == DeterminingRegime::dissipative) {
    if (!(theta > 0)) throw std::invalid_argument("dissipative mode count needs theta > 0");
    return n / theta;
  }
  if (!(theta2 + alpha < 0))
    throw std::invalid_argument("nondissipative mode count needs alpha < -theta2");
  return -n / (theta2 + alpha);
}

// ceil(G^e), constant 1, never below one mode. The small relative guard keeps
// exact powers such as 10^3 from rounding up to 1001.
inline long determining_mode_count(double G, int n, double theta, double theta2, double alpha,
                                   DeterminingRegime r) {
  if (!(G >= 0) || !std::isfinite(G)) throw std::invalid_argument("Grashof number must be finite and >= 0");
  const double v = std::pow(G, determining_mode_exponent(n, theta, theta2, alpha, r));
  const double c = std::ceil(v * (1 - 1e-12));
  return std::max(1L, static_cast<long>(c));
}

enum class BudgetQuadrature {
  trapezoid,  // sampled integrands
  stage       // running integrals accumulated with the RK4 stage weights
};

// Residual of d/dt<u,Nu> + 2<Au,Nu> = 2<f,Nu> on consecutive intervals of
// `samples_per_interval` sample gaps (0: the whole record as one interval).
inline std::vector<double> energy_budget_residual(const TrajectoryRecord& r,
                                                  BudgetQuadrature q = BudgetQuadrature::trapezoid,
                                                  std::size_t samples_per_interval = 0) {
  const std::size_t n = r.size();
  const std::size_t span = samples_per_interval == 0 ? (n > 0 ? n - 1 : 0) : samples_per_interval;
  if (span < 4 || n < span + 1)
    throw std::invalid_argument("energy budget needs at least 4 sample gaps per interval");
  const auto e = r.series("energy_N");
  std::vector<double> d, f;
  if (q == BudgetQuadrature::trapezoid) {
    d = r.series("dissipation_AN");
    f = r.series("forcing_N");
  } else {
    d = r.series("int_dissipation_AN");
    f = r.series("int_forcing_N");
  }
  std::vector<double> out;
  for (std::size_t lo = 0; lo + span < n; lo += span) {
    const std::size_t hi = lo + span;
    double id = 0, iff = 0;
    if (q == BudgetQuadrature::trapezoid) {
      for (std::size_t i = lo; i < hi; ++i) {
        const double h = r.times[i + 1] - r.times[i];
        id += 0.5 * h * (d[i] + d[i + 1]);
        iff += 0.5 * h * (f[i] + f[i + 1]);
      }
    } else {
      id = d[hi] - d[lo];
      iff = f[hi] - f[lo];
    }
    out.push_back(e[hi] - e[lo] + 2 * id - 2 * iff);
  }
  return out;
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

struct MhdInvariants {
  double energy = 0;
  double cross_helicity = 0;
};

inline MhdInvariants mhd_invariants(const State& s) {
  if (s.size() != 2) throw std::invalid_argument("MHD invariants need a coupled (u, h) state");
  return {0.5 * (inner(s[0], s[0]) + inner(s[1], s[1])), 0.5 * inner(s[0], s[1])};
}

// E(kappa) = 1/2 sum over kappa - 1/2 <= |m| < kappa + 1/2 of |v(m)|^2, with
// m the integer lattice index. Sums to 1/2 ||v||_0^2.
inline std::vector<double> shell_spectrum(const Field& v) {
  const Grid& g = v.grid();
  std::vector<double> E;
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    double a = 0;
    for (int c = 0; c < v.dims(); ++c) a += std::norm(v[c][i]);
    double m2 = 0;
    for (int d = 0; d < g.dims(); ++d) m2 += double(g.m(d, i)) * g.m(d, i);
    const auto shell = static_cast<std::size_t>(std::floor(std::sqrt(m2) + 0.5));
    if (shell >= E.size()) E.resize(shell + 1, 0.0);
    E[shell] += 0.5 * g.weight(i) * a;
  }
  return E;
}

inline void write_spectrum_csv(const std::string& path, const std::vector<double>& E) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "kappa,E\n" << std::setprecision(17);
  for (std::size_t k = 0; k < E.size(); ++k) os << k << ',' << E[k] << '\n';
}

// Aggregates recomputed from the samples of one record.
struct LongTimeAggregates {
  double G = 0;
  ReynoldsEstimate re;
  double gr_constant = 0;  // G / (Re^2 + Re), 0 when Re = 0
  double kolmogorov = 0;
  bool has_reynolds = false;
};

inline LongTimeAggregates long_time_aggregates(const TrajectoryRecord& r, const ModelParams& p,
                                               const RunScales& sc) {
  LongTimeAggregates a;
  a.G = grashof_general(r, p.theta, p.theta2);
  const auto orders = reynolds_orders(p.theta1, p.theta2);
  if (sc.nu > 0 && r.size() >= 4 && r.has(norm_column(orders[0])) && r.has(norm_column(orders[1]))) {
    a.re = reynolds_and_dissipation(r, p.theta1, p.theta2, sc);
    a.has_reynolds = true;
    const double d = a.re.Re * a.re.Re + a.re.Re;
    a.gr_constant = d > 0 ? a.G / d : 0;
    if (p.theta + p.theta1 != 0) a.kolmogorov = kolmogorov_bound(a.re.Re, p.theta, p.theta1);
  }
  return a;
}

inline void write_aggregates(const std::string& path, const LongTimeAggregates& a) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << std::setprecision(17);
  os << "G," << a.G << '\n';
  if (a.has_reynolds) {
    os << "U2," << a.re.U2 << '\n'
       << "eps," << a.re.eps << '\n'
       << "Re," << a.re.Re << '\n'
       << "average_stable," << (a.re.stable ? 1 : 0) << '\n'
       << "G_over_Re2_plus_Re," << a.gr_constant << '\n'
       << "kolmogorov_shape," << a.kolmogorov << '\n';
  }
}

}  // namespace rnsm
