#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include "multiplier.hpp"
#include "spectral.hpp"

namespace rnsm {

enum class Form { B1, B2, B3, B4, B5 };

inline std::string to_string(Form f) {
  static const char* names[] = {"B1", "B2", "B3", "B4", "B5"};
  return names[static_cast<int>(f)];
}

inline Form form_from(const std::string& s) {
  for (Form f : {Form::B1, Form::B2, Form::B3, Form::B4, Form::B5})
    if (to_string(f) == s) return f;
  throw std::invalid_argument("unknown bilinear form '" + s + "'");
}

// Which bilinear map, and the M, N multipliers in B(u,v) = Bbar(Mu, Nv).
// For the coupled forms M and N act block-diagonally on (u, h).
struct BilinearSelector {
  Form form = Form::B1;
  std::array<int, 3> ijk{1, 1, 1};
  MultiplierSpec m_spec;
  MultiplierSpec n_spec;

  // B3 and B4 are the (1,1,1) and (2,1,1) instances of B5.
  BilinearSelector normalized() const {
    BilinearSelector s = *this;
    if (form == Form::B3) s.ijk = {1, 1, 1};
    if (form == Form::B4) s.ijk = {2, 1, 1};
    if (form == Form::B3 || form == Form::B4) s.form = Form::B5;
    for (int x : s.ijk)
      if (x != 1 && x != 2) throw std::invalid_argument("B5 indices must be 1 or 2");
    return s;
  }
  bool coupled() const { return form == Form::B3 || form == Form::B4 || form == Form::B5; }
};

namespace detail {

// Per-thread buffers for the point values of one product.
struct ProductWorkspace {
  std::vector<RealArray> v, grad, out;
  ComplexArray tmp;
  void ensure(const Grid& g) {
    const int n = g.dims();
    if (tmp.size() == g.spectral_size() && static_cast<int>(v.size()) == n &&
        v[0].size() == g.physical_size())
      return;
    v.assign(n, RealArray(g.physical_size()));
    out.assign(n, RealArray(g.physical_size()));
    grad.assign(n * n, RealArray(g.physical_size()));
    tmp.assign(g.spectral_size(), cplx{});
  }
};

inline ProductWorkspace& workspace(const Grid& g) {
  thread_local ProductWorkspace ws;
  ws.ensure(g);
  return ws;
}

// Point values of a (into ws.v) and of every derivative d_j b_i (into
// ws.grad[i*n + j]).
inline ProductWorkspace& product_inputs(const Field& a, const Field& b) {
  const Grid& g = a.grid();
  const int n = g.dims();
  auto& ws = workspace(g);
  for (int c = 0; c < n; ++c) to_physical(g, a[c].data(), ws.v[c].data());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      for (std::size_t m = 0; m < g.spectral_size(); ++m)
        ws.tmp[m] = cplx(-b[i][m].imag() * g.k(j, m), b[i][m].real() * g.k(j, m));
      to_physical(g, ws.tmp.data(), ws.grad[i * n + j].data());
    }
  return ws;
}

inline Field finish(const GridPtr& gp, ProductWorkspace& ws) {
  const Grid& g = *gp;
  Field out(gp);
  for (int c = 0; c < g.dims(); ++c) to_spectral(g, ws.out[c].data(), out[c].data());
  truncate_inplace(out);
  leray_project_inplace(out);
  return out;
}

}  // namespace detail

// P[(v.grad) w]
inline Field bbar1(const Field& v, const Field& w) {
  v.check_same(w);
  const Grid& g = v.grid();
  const int n = g.dims();
  const std::size_t np = g.physical_size();
  auto& ws = detail::product_inputs(v, w);
  for (int i = 0; i < n; ++i) {
    double* o = ws.out[i].data();
    std::fill(o, o + np, 0.0);
    for (int j = 0; j < n; ++j) {
      const double* vj = ws.v[j].data();
      const double* dw = ws.grad[i * n + j].data();
      for (std::size_t x = 0; x < np; ++x) o[x] += vj[x] * dw[x];
    }
  }
  return detail::finish(v.grid_ptr(), ws);
}

// P[(w.grad) v + (grad w)^T v], evaluated as P[w^i d_i v^k - w_i d_k v_i]:
// the two differ by the gradient of v.w, which the projection removes.
inline Field bbar2(const Field& v, const Field& w) {
  v.check_same(w);
  const Grid& g = v.grid();
  const int n = g.dims();
  const std::size_t np = g.physical_size();
  auto& ws = detail::product_inputs(w, v);  // point values of w, derivatives of v
  for (int k = 0; k < n; ++k) {
    double* o = ws.out[k].data();
    std::fill(o, o + np, 0.0);
    for (int i = 0; i < n; ++i) {
      const double* wi = ws.v[i].data();
      const double* dvk = ws.grad[k * n + i].data();  // d_i v_k
      const double* dvi = ws.grad[i * n + k].data();  // d_k v_i
      for (std::size_t x = 0; x < np; ++x) o[x] += wi[x] * (dvk[x] - dvi[x]);
    }
  }
  return detail::finish(v.grid_ptr(), ws);
}

inline Field bbar(int which, const Field& v, const Field& w) {
  if (which == 1) return bbar1(v, w);
  if (which == 2) return bbar2(v, w);
  throw std::invalid_argument("bilinear index must be 1 or 2");
}

// (Bbar_i(v1,w1) - Bbar_j(v2,w2), Bbar_k(v1,w2) - Bbar_j(v2,w1))
inline State bbar5(std::array<int, 3> ijk, const State& v, const State& w) {
  if (v.size() != 2 || w.size() != 2) throw std::invalid_argument("coupled form needs field pairs");
  const auto [i, j, k] = ijk;
  State out;
  out.push_back(bbar(i, v[0], w[0]) - bbar(j, v[1], w[1]));
  out.push_back(bbar(k, v[0], w[1]) - bbar(j, v[1], w[0]));
  out[0].set_kind(FieldKind::velocity);
  out[1].set_kind(FieldKind::magnetic);
  return out;
}

inline Field compose_B(const BilinearSelector& sel, const Field& u, const Field& v) {
  if (sel.coupled()) throw std::invalid_argument("coupled selector applied to a single field");
  const Field mu = apply_multiplier(sel.m_spec, u);
  const Field nv = apply_multiplier(sel.n_spec, v);
  return sel.form == Form::B1 ? bbar1(mu, nv) : bbar2(mu, nv);
}

inline State compose_B(const BilinearSelector& sel, const State& u, const State& v) {
  if (!sel.coupled()) {
    if (u.size() != 1 || v.size() != 1) throw std::invalid_argument("single-field selector");
    return {compose_B(sel, u[0], v[0])};
  }
  const auto s = sel.normalized();
  State mu, nv;
  for (const auto& f : u) mu.push_back(apply_multiplier(s.m_spec, f));
  for (const auto& f : v) nv.push_back(apply_multiplier(s.n_spec, f));
  return bbar5(s.ijk, mu, nv);
}

// Block-diagonal application of a multiplier to a state.
inline State apply_multiplier(const MultiplierSpec& s, const State& u) {
  State out;
  for (const auto& f : u) out.push_back(apply_multiplier(s, f));
  return out;
}

inline double trilinear(const BilinearSelector& sel, const Field& u, const Field& v,
                        const Field& w) {
  return inner(compose_B(sel, u, v), w);
}

inline double trilinear(const BilinearSelector& sel, const State& u, const State& v,
                        const State& w) {
  return inner(compose_B(sel, u, v), w);
}

}  // namespace rnsm
