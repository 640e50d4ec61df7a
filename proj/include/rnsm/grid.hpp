#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace rnsm {

// Periodic box [0,L)^n sampled on R points per axis. Spectral arrays use the
// real-to-complex half layout: the last axis keeps indices 0..R/2, the other
// axes run over 0..R-1 with the usual signed wrap. Storage is row-major.
class Grid {
 public:
  Grid(int n_dim, int resolution, double length = 2 * std::numbers::pi,
       double dealias_fraction = 2.0 / 3.0)
      : n_(n_dim), r_(resolution), len_(length), frac_(dealias_fraction) {
    if (n_ != 2 && n_ != 3)
      throw std::invalid_argument("grid dimension must be 2 or 3, got " + std::to_string(n_));
    if (r_ < 8 || (r_ & (r_ - 1)) != 0)
      throw std::invalid_argument("resolution must be a power of two >= 8, got " +
                                  std::to_string(r_));
    if (!(len_ > 0)) throw std::invalid_argument("domain length must be positive");
    if (!(frac_ > 0 && frac_ <= 1)) throw std::invalid_argument("dealias fraction must lie in (0,1]");

    cutoff_ = static_cast<int>(std::floor(frac_ * r_ / 2 + 1e-12));
    if (cutoff_ > r_ / 2 - 1) cutoff_ = r_ / 2 - 1;

    half_ = r_ / 2 + 1;
    nspec_ = static_cast<std::size_t>(r_) * half_ * (n_ == 3 ? r_ : 1);
    nphys_ = 1;
    for (int d = 0; d < n_; ++d) nphys_ *= static_cast<std::size_t>(r_);

    const double k0 = 2 * std::numbers::pi / len_;
    for (auto& v : m_) v.assign(nspec_, 0);
    for (auto& v : k_) v.assign(nspec_, 0.0);
    k2_.assign(nspec_, 0.0);
    weight_.assign(nspec_, 0.0);
    retained_.assign(nspec_, 0);

    for (std::size_t idx = 0; idx < nspec_; ++idx) {
      std::array<int, 3> raw{};
      std::size_t rest = idx;
      if (n_ == 2) {
        raw[1] = static_cast<int>(rest % half_);
        raw[0] = static_cast<int>(rest / half_);
      } else {
        raw[2] = static_cast<int>(rest % half_);
        rest /= half_;
        raw[1] = static_cast<int>(rest % r_);
        raw[0] = static_cast<int>(rest / r_);
      }
      bool nyquist = false, inside = true, nonzero = false;
      double k2 = 0;
      for (int d = 0; d < n_; ++d) {
        const bool last = d == n_ - 1;
        int m = raw[d];
        if (!last && m > r_ / 2) m -= r_;
        if (std::abs(m) == r_ / 2) nyquist = true;
        if (std::abs(m) > cutoff_) inside = false;
        if (m != 0) nonzero = true;
        m_[d][idx] = m;
        k_[d][idx] = k0 * m;
        k2 += k_[d][idx] * k_[d][idx];
      }
      if (nyquist) {
        for (int d = 0; d < n_; ++d) k_[d][idx] = 0;
        k2 = 0;
      }
      k2_[idx] = k2;
      weight_[idx] = raw[n_ - 1] == 0 ? 1.0 : 2.0;
      retained_[idx] = (!nyquist && inside && nonzero) ? 1 : 0;
      if (retained_[idx] && k2 < kmin2_) kmin2_ = k2;
    }
  }

  int dims() const { return n_; }
  int resolution() const { return r_; }
  double length() const { return len_; }
  double dealias_fraction() const { return frac_; }
  int cutoff() const { return cutoff_; }
  double k0() const { return 2 * std::numbers::pi / len_; }
  double kmin2() const { return kmin2_; }

  std::size_t spectral_size() const { return nspec_; }
  std::size_t physical_size() const { return nphys_; }
  int half_extent() const { return half_; }

  // Signed integer lattice index and physical wavenumber along axis d.
  int m(int d, std::size_t idx) const { return m_[d][idx]; }
  double k(int d, std::size_t idx) const { return k_[d][idx]; }
  double k2(std::size_t idx) const { return k2_[idx]; }
  // Multiplicity of a stored mode once its conjugate partner is counted.
  double weight(std::size_t idx) const { return weight_[idx]; }
  bool retained(std::size_t idx) const { return retained_[idx] != 0; }

  // Storage index of the lattice point with signed indices m (last index >= 0),
  // or -1 when it is not representable.
  long index_of(std::array<int, 3> m) const {
    auto wrap = [&](int v) { return v < 0 ? v + r_ : v; };
    const int last = m[n_ - 1];
    if (last < 0 || last >= half_) return -1;
    for (int d = 0; d < n_ - 1; ++d)
      if (m[d] <= -r_ / 2 || m[d] >= r_ / 2) return -1;
    if (n_ == 2) return static_cast<long>(wrap(m[0])) * half_ + last;
    return (static_cast<long>(wrap(m[0])) * r_ + wrap(m[1])) * half_ + last;
  }

  // The stored mode's partner on the self-conjugate plane (last index 0):
  // the index of -m. Returns idx itself for modes off that plane.
  std::size_t conjugate_partner(std::size_t idx) const {
    if (m_[n_ - 1][idx] != 0) return idx;
    std::array<int, 3> neg{};
    for (int d = 0; d < n_; ++d) neg[d] = -m_[d][idx];
    const long j = index_of(neg);
    return j < 0 ? idx : static_cast<std::size_t>(j);
  }

  bool same_as(const Grid& o) const {
    return n_ == o.n_ && r_ == o.r_ && len_ == o.len_ && frac_ == o.frac_;
  }

 private:
  int n_, r_;
  double len_, frac_;
  int cutoff_ = 0, half_ = 0;
  std::size_t nspec_ = 0, nphys_ = 0;
  std::array<std::vector<std::int32_t>, 3> m_;
  std::array<std::vector<double>, 3> k_;
  std::vector<double> k2_, weight_;
  std::vector<std::uint8_t> retained_;
  double kmin2_ = HUGE_VAL;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_grid(int n_dim, int resolution, double length = 2 * std::numbers::pi,
                         double dealias_fraction = 2.0 / 3.0) {
  return std::make_shared<const Grid>(n_dim, resolution, length, dealias_fraction);
}

}  // namespace rnsm
