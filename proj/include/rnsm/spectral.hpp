#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>

#include "fft.hpp"
#include "field.hpp"
#include "multiplier.hpp"

namespace rnsm {

// v - k (k.v)/|k|^2 on every mode; the mean and Nyquist modes are zeroed.
inline void leray_project_inplace(Field& v) {
  const Grid& g = v.grid();
  const int n = v.dims();
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    const double k2 = g.k2(i);
    if (k2 == 0) {
      for (int c = 0; c < n; ++c) v[c][i] = 0;
      continue;
    }
    cplx kv = 0;
    for (int c = 0; c < n; ++c) kv += g.k(c, i) * v[c][i];
    kv /= k2;
    for (int c = 0; c < n; ++c) v[c][i] -= g.k(c, i) * kv;
  }
}

inline Field leray_project(Field v) {
  leray_project_inplace(v);
  return v;
}

// Zero every mode outside the dealiased retained set.
inline void truncate_inplace(Field& v) {
  const Grid& g = v.grid();
  for (std::size_t i = 0; i < g.spectral_size(); ++i)
    if (!g.retained(i))
      for (int c = 0; c < v.dims(); ++c) v[c][i] = 0;
}

// (sum_k (1+|k|^2)^s |v(k)|^2)^{1/2}
inline double sobolev_norm_sq(const Field& v, double s) {
  const Grid& g = v.grid();
  double sum = 0;
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    if (g.k2(i) == 0) continue;
    double a = 0;
    for (int c = 0; c < v.dims(); ++c) a += std::norm(v[c][i]);
    if (a == 0) continue;
    sum += g.weight(i) * std::pow(1 + g.k2(i), s) * a;
  }
  return sum;
}

inline double sobolev_norm(const Field& v, double s) { return std::sqrt(sobolev_norm_sq(v, s)); }

// Homogeneous variant with |k|^{2s}; used where the nondimensional scalings
// call for it.
inline double homogeneous_norm(const Field& v, double s) {
  const Grid& g = v.grid();
  double sum = 0;
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    if (g.k2(i) == 0) continue;
    double a = 0;
    for (int c = 0; c < v.dims(); ++c) a += std::norm(v[c][i]);
    sum += g.weight(i) * std::pow(g.k2(i), s) * a;
  }
  return std::sqrt(sum);
}

// L^{-n/2} times the homogeneous norm: the box-averaged size of a
// dimensional field, which is what the Grashof numbers measure.
inline double volume_averaged_norm(const Field& v, double s) {
  const Grid& g = v.grid();
  return std::pow(g.length(), -0.5 * g.dims()) * homogeneous_norm(v, s);
}

// max_k |k.v(k)| / max_k |v(k)|
inline double divergence_residual(const Field& v) {
  const Grid& g = v.grid();
  double dmax = 0, vmax = 0;
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    cplx kv = 0;
    double a = 0;
    for (int c = 0; c < v.dims(); ++c) {
      kv += g.k(c, i) * v[c][i];
      a += std::norm(v[c][i]);
    }
    dmax = std::max(dmax, std::abs(kv) / std::max(std::sqrt(g.k2(i)), 1e-300));
    vmax = std::max(vmax, std::sqrt(a));
  }
  return vmax == 0 ? 0 : dmax / vmax;
}

// Averages each self-conjugate-plane coefficient with its partner so the
// half spectrum describes a real field.
inline void enforce_hermitian(Field& v) {
  const Grid& g = v.grid();
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    const std::size_t j = g.conjugate_partner(i);
    if (j < i) continue;
    for (int c = 0; c < v.dims(); ++c) {
      if (j == i) {
        if (g.m(g.dims() - 1, i) == 0) v[c][i] = v[c][i].real();
        continue;
      }
      const cplx avg = 0.5 * (v[c][i] + std::conj(v[c][j]));
      v[c][i] = avg;
      v[c][j] = std::conj(avg);
    }
  }
}

// Point values, component by component.
inline std::vector<RealArray> physical_values(const Field& v) {
  std::vector<RealArray> out(v.dims(), RealArray(v.grid().physical_size()));
  for (int c = 0; c < v.dims(); ++c) to_physical(v.grid(), v[c].data(), out[c].data());
  return out;
}

// Riemann sum of |u|^2 over the box; equals sobolev_norm_sq(v, 0) for band-limited v.
inline double physical_l2_sq(const Field& v) {
  const auto phys = physical_values(v);
  const Grid& g = v.grid();
  const double cell = std::pow(g.length() / g.resolution(), g.dims());
  double s = 0;
  for (const auto& c : phys)
    for (double x : c) s += x * x;
  return s * cell;
}

// Copies every lattice mode representable on both grids (same n and L).
inline Field resample(const Field& v, const GridPtr& target) {
  const Grid& g = v.grid();
  if (g.dims() != target->dims() || g.length() != target->length())
    throw std::invalid_argument("resample needs matching dimension and box length");
  Field out(target, v.kind());
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    if (g.k2(i) == 0) continue;
    const long j = target->index_of({g.m(0, i), g.m(1, i), g.dims() == 3 ? g.m(2, i) : 0});
    if (j < 0 || target->k2(j) == 0) continue;
    for (int c = 0; c < v.dims(); ++c) out[c][j] = v[c][i];
  }
  return out;
}

// Taylor-Green cell (sin x cos y, -cos x sin y[, 0]) scaled to the box:
// x is replaced by k0 x. A single shell |k|^2 = 2 k0^2, so every scalar
// multiplier acts on it as a number and its self-advection is a gradient.
inline Field taylor_green_field(const GridPtr& g, double amplitude = 1) {
  Field v(g);
  // sin x cos y has coefficient sign(mx)/4i on e^{i(mx x + my y)}, |mx| = |my| = 1,
  // -cos x sin y has -sign(my)/4i; the basis carries L^{-n/2}.
  const double s = amplitude * std::pow(g->length(), 0.5 * g->dims());
  const cplx I(0, 1);
  for (int mx : {-1, 1})
    for (int my : {-1, 1}) {
      const long i = g->index_of({mx, my, 0});
      if (i < 0) continue;  // conjugate half, implied by symmetry
      v[0][i] = s * double(mx) / (4.0 * I);
      v[1][i] = -s * double(my) / (4.0 * I);
    }
  return v;
}

struct CoercivityConstants {
  double c_A = 0;
  double C_A = 0;
  double c_N = 0;
  // min_k a(k): the slowest linear decay rate on the lattice.
  double decay_rate = 0;
};

inline CoercivityConstants coercivity_constants(const MultiplierSpec& a_spec,
                                                const MultiplierSpec& n_spec, const Grid& g,
                                                double theta, double theta2) {
  CoercivityConstants cc;
  double ca = std::numeric_limits<double>::infinity(), cn = ca, amin = ca, nmin = ca;
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    if (!g.retained(i)) continue;
    const double k2 = g.k2(i), a = a_spec(k2), n = n_spec(k2);
    ca = std::min(ca, a * n / std::pow(1 + k2, theta - theta2));
    cn = std::min(cn, n * std::pow(1 + k2, theta2));
    amin = std::min(amin, a);
    nmin = std::min(nmin, n);
  }
  if (!(amin > 0)) throw std::invalid_argument("dissipation symbol is not positive on the lattice");
  if (!(nmin > 0)) throw std::invalid_argument("smoothing symbol is not positive on the lattice");
  cc.c_A = ca;
  cc.c_N = cn;
  cc.decay_rate = amin;
  return cc;
}

struct Band {
  double k_lo = 0;
  double k_hi = std::numeric_limits<double>::infinity();
};

// Deterministic divergence-free field. Mode amplitudes scale as |k|^slope
// (times a Gaussian draw); the result is normalized to ||v||_0 = amplitude.
// An optional band restricts support to k_lo <= |k| <= k_hi.
inline Field random_divfree_field(const GridPtr& gp, std::uint64_t seed, double slope,
                                  double amplitude, std::optional<Band> band = std::nullopt) {
  const Grid& g = *gp;
  Field v(gp);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    for (int c = 0; c < v.dims(); ++c) {
      const double re = normal(rng), im = normal(rng);
      if (!g.retained(i)) continue;
      const double kk = std::sqrt(g.k2(i));
      if (band && (kk < band->k_lo - 1e-12 || kk > band->k_hi + 1e-12)) continue;
      v[c][i] = cplx(re, im) * std::pow(kk, slope);
    }
  }
  enforce_hermitian(v);
  leray_project_inplace(v);
  const double norm = sobolev_norm(v, 0);
  if (norm > 0) v *= amplitude / norm;
  return v;
}

}  // namespace rnsm
