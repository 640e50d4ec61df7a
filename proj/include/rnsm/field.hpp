#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "arrays.hpp"
#include "grid.hpp"

namespace rnsm {

enum class FieldKind { velocity, magnetic };

// Truncated Fourier coefficients of a real vector field: one half-spectrum
// array per component.
class Field {
 public:
  Field() = default;
  explicit Field(GridPtr g, FieldKind kind = FieldKind::velocity)
      : grid_(std::move(g)), kind_(kind) {
    if (!grid_) throw std::invalid_argument("field needs a grid");
    comp_.assign(grid_->dims(), ComplexArray(grid_->spectral_size(), cplx{}));
  }

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  FieldKind kind() const { return kind_; }
  void set_kind(FieldKind k) { kind_ = k; }
  int dims() const { return static_cast<int>(comp_.size()); }
  std::size_t size() const { return grid_->spectral_size(); }

  ComplexArray& operator[](int c) { return comp_[c]; }
  const ComplexArray& operator[](int c) const { return comp_[c]; }

  bool empty() const { return !grid_; }

  void set_zero() {
    for (auto& c : comp_) std::fill(c.begin(), c.end(), cplx{});
  }

  Field& operator+=(const Field& o) {
    check_same(o);
    for (int c = 0; c < dims(); ++c)
      for (std::size_t i = 0; i < size(); ++i) comp_[c][i] += o.comp_[c][i];
    return *this;
  }
  Field& operator-=(const Field& o) {
    check_same(o);
    for (int c = 0; c < dims(); ++c)
      for (std::size_t i = 0; i < size(); ++i) comp_[c][i] -= o.comp_[c][i];
    return *this;
  }
  Field& operator*=(double s) {
    for (auto& c : comp_)
      for (auto& z : c) z *= s;
    return *this;
  }
  // this += a * x
  Field& axpy(double a, const Field& x) {
    check_same(x);
    for (int c = 0; c < dims(); ++c)
      for (std::size_t i = 0; i < size(); ++i) comp_[c][i] += a * x.comp_[c][i];
    return *this;
  }

  void check_same(const Field& o) const {
    if (!grid_ || !o.grid_ || !grid_->same_as(*o.grid_))
      throw std::invalid_argument("fields live on different grids");
  }

  double max_abs() const {
    double m = 0;
    for (const auto& c : comp_)
      for (const auto& z : c) {
        const double a = std::abs(z);
        if (std::isnan(a)) return a;
        m = std::max(m, a);
      }
    return m;
  }

 private:
  GridPtr grid_;
  std::vector<ComplexArray> comp_;
  FieldKind kind_ = FieldKind::velocity;
};

inline Field operator+(Field a, const Field& b) { return a += b; }
inline Field operator-(Field a, const Field& b) { return a -= b; }
inline Field operator*(double s, Field a) { return a *= s; }

// Real L2 pairing <u,v> evaluated through Parseval.
inline double inner(const Field& u, const Field& v) {
  u.check_same(v);
  const Grid& g = u.grid();
  double s = 0;
  for (int c = 0; c < u.dims(); ++c)
    for (std::size_t i = 0; i < g.spectral_size(); ++i)
      s += g.weight(i) * (u[c][i].real() * v[c][i].real() + u[c][i].imag() * v[c][i].imag());
  return s;
}

// A velocity field, or the velocity/magnetic pair of the MHD systems.
using State = std::vector<Field>;

inline State& axpy(State& y, double a, const State& x) {
  for (std::size_t b = 0; b < y.size(); ++b) y[b].axpy(a, x[b]);
  return y;
}

inline double inner(const State& u, const State& v) {
  double s = 0;
  for (std::size_t b = 0; b < u.size(); ++b) s += inner(u[b], v[b]);
  return s;
}

inline double max_abs(const State& s) {
  double m = 0;
  for (const auto& f : s) {
    const double a = f.max_abs();
    if (std::isnan(a)) return a;
    m = std::max(m, a);
  }
  return m;
}

inline State zeros_like(const State& s) {
  State z;
  for (const auto& f : s) z.emplace_back(f.grid_ptr(), f.kind());
  return z;
}

}  // namespace rnsm
