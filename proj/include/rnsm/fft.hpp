#pragma once

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <utility>

#include "arrays.hpp"
#include "grid.hpp"

namespace rnsm {

// Transforms between the orthonormal Fourier coefficients of a field and its
// point values:  u(x) = L^{-n/2} sum_k uhat(k) e^{i k.x}.  FFTW is unnormalized,
// so the inverse multiplies by L^{-n/2} and the forward by L^{n/2}/R^n.
// With this scaling the L2 norm is sum_k |uhat(k)|^2 over the full spectrum.
namespace detail {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

inline std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

inline const PlanPair& plans_for(int n_dim, int r) {
  static std::map<std::pair<int, int>, PlanPair> cache;
  std::lock_guard<std::mutex> lock(plan_mutex());
  auto& p = cache[{n_dim, r}];
  if (!p.forward) {
    int dims[3] = {r, r, r};
    std::size_t nphys = 1;
    for (int d = 0; d < n_dim; ++d) nphys *= static_cast<std::size_t>(r);
    const std::size_t nspec = nphys / r * (r / 2 + 1);
    RealArray real(nphys);
    ComplexArray spec(nspec);
    auto* c = reinterpret_cast<fftw_complex*>(spec.data());
    p.forward = fftw_plan_dft_r2c(n_dim, dims, real.data(), c, FFTW_ESTIMATE);
    p.inverse = fftw_plan_dft_c2r(n_dim, dims, c, real.data(), FFTW_ESTIMATE);
  }
  return p;
}

inline ComplexArray& scratch_spectrum(std::size_t n) {
  thread_local ComplexArray buf;
  if (buf.size() < n) buf.resize(n);
  return buf;
}

}  // namespace detail

// c2r overwrites its input, so the coefficients are copied to scratch first.
inline void to_physical(const Grid& g, const cplx* spec, double* phys) {
  const auto& p = detail::plans_for(g.dims(), g.resolution());
  auto& buf = detail::scratch_spectrum(g.spectral_size());
  std::memcpy(static_cast<void*>(buf.data()), spec, g.spectral_size() * sizeof(cplx));
  fftw_execute_dft_c2r(p.inverse, reinterpret_cast<fftw_complex*>(buf.data()), phys);
  const double s = std::pow(g.length(), -0.5 * g.dims());
  for (std::size_t i = 0; i < g.physical_size(); ++i) phys[i] *= s;
}

inline void to_spectral(const Grid& g, double* phys, cplx* spec) {
  const auto& p = detail::plans_for(g.dims(), g.resolution());
  fftw_execute_dft_r2c(p.forward, phys, reinterpret_cast<fftw_complex*>(spec));
  const double s =
      std::pow(g.length(), 0.5 * g.dims()) / static_cast<double>(g.physical_size());
  for (std::size_t i = 0; i < g.spectral_size(); ++i) spec[i] *= s;
}

}  // namespace rnsm
