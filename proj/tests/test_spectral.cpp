#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <numbers>

#include "rnsm/snapshot.hpp"
#include "rnsm/spectral.hpp"

using namespace rnsm;

namespace {

double rel_diff(const Field& a, const Field& b) {
  const double d = sobolev_norm(a - b, 0);
  const double s = std::max(sobolev_norm(a, 0), sobolev_norm(b, 0));
  return s == 0 ? d : d / s;
}

// Arbitrary field that is neither divergence-free nor dealiased.
Field raw_field(const GridPtr& g, unsigned seed) {
  Field v(g);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int c = 0; c < v.dims(); ++c)
    for (auto& z : v[c]) z = cplx(u(rng), u(rng));
  truncate_inplace(v);
  enforce_hermitian(v);
  return v;
}

}  // namespace

TEST(Grid, CutoffFollowsTwoThirdsRule) {
  auto g2 = make_grid(2, 64);
  EXPECT_EQ(g2->cutoff(), 21);
  EXPECT_EQ(g2->spectral_size(), 64u * 33u);
  int lo = 0, hi = 0;
  for (std::size_t i = 0; i < g2->spectral_size(); ++i) {
    lo = std::min(lo, g2->m(0, i));
    hi = std::max(hi, g2->m(0, i));
  }
  EXPECT_EQ(lo, -31);  // -32 is the Nyquist index, stored as +32
  EXPECT_EQ(hi, 32);
  EXPECT_EQ(make_grid(3, 16)->cutoff(), 5);
  EXPECT_DOUBLE_EQ(g2->kmin2(), 1.0);
}

TEST(Grid, RejectsBadShapes) {
  EXPECT_THROW(make_grid(2, 7), std::invalid_argument);
  EXPECT_THROW(make_grid(2, 4), std::invalid_argument);
  EXPECT_THROW(make_grid(2, 48), std::invalid_argument);
  EXPECT_THROW(make_grid(4, 16), std::invalid_argument);
  EXPECT_THROW(make_grid(2, 16, -1.0), std::invalid_argument);
}

TEST(Grid, RetainedSetExcludesMeanAndNyquist) {
  auto g = make_grid(3, 16);
  for (std::size_t i = 0; i < g->spectral_size(); ++i) {
    bool inside = true, zero = true;
    for (int d = 0; d < 3; ++d) {
      inside = inside && std::abs(g->m(d, i)) <= 5;
      zero = zero && g->m(d, i) == 0;
    }
    EXPECT_EQ(g->retained(i), inside && !zero);
  }
}

TEST(Grid, WavenumbersScaleWithLength) {
  auto g = make_grid(2, 16, 4 * std::numbers::pi);
  const long i = g->index_of({2, 1, 0});
  ASSERT_GE(i, 0);
  EXPECT_DOUBLE_EQ(g->k(0, i), 1.0);
  EXPECT_DOUBLE_EQ(g->k(1, i), 0.5);
  EXPECT_DOUBLE_EQ(g->kmin2(), 0.25);
}

TEST(Leray, SingleModeDecomposition) {
  auto g = make_grid(2, 16);
  const long i = g->index_of({0, 3, 0});
  Field a(g), b(g);
  a[0][i] = 1;
  b[1][i] = 1;
  leray_project_inplace(a);
  leray_project_inplace(b);
  EXPECT_EQ(a[0][i], cplx(1, 0));
  EXPECT_EQ(a[1][i], cplx(0, 0));
  EXPECT_EQ(b[0][i], cplx(0, 0));
  EXPECT_EQ(b[1][i], cplx(0, 0));
}

TEST(Leray, AnnihilatesGradients) {
  for (int n : {2, 3}) {
    auto g = make_grid(n, 16);
    std::mt19937 rng(4);
    std::normal_distribution<double> nd;
    Field v(g);
    for (std::size_t i = 0; i < g->spectral_size(); ++i) {
      const cplx phi(nd(rng), nd(rng));
      for (int c = 0; c < n; ++c) v[c][i] = cplx(0, g->k(c, i)) * phi;
    }
    const double before = sobolev_norm(v, 0);
    leray_project_inplace(v);
    EXPECT_LT(sobolev_norm(v, 0), 1e-14 * before);
  }
}

TEST(Leray, IdempotentAndDivergenceFree) {
  for (int n : {2, 3}) {
    auto g = make_grid(n, n == 2 ? 64 : 16);
    for (unsigned s = 0; s < 5; ++s) {
      const Field p = leray_project(raw_field(g, s));
      EXPECT_LT(divergence_residual(p), 1e-12);
      EXPECT_LT(rel_diff(leray_project(p), p), 1e-14);
      const Field r = random_divfree_field(g, s, -1, 1);
      EXPECT_LT(rel_diff(leray_project(r), r), 1e-14);
    }
  }
}

TEST(Multiplier, SymbolExamples) {
  auto g = make_grid(2, 16);
  const long i = g->index_of({0, 2, 0});  // |k|^2 = 4
  Field v(g);
  v[0][i] = 1;
  EXPECT_NEAR(apply_multiplier(MultiplierSpec::helmholtz(-1, 1), v)[0][i].real(), 0.2, 1e-15);
  EXPECT_NEAR(apply_multiplier(MultiplierSpec::laplacian_power(1, 0.3), v)[0][i].real(), 1.2, 1e-15);
  EXPECT_NEAR(apply_multiplier(MultiplierSpec::voigt(1, 0.1), v)[0][i].real(), 0.08, 1e-15);
  // Fractional filter: (1 + (a^2|k|^2)^e)^{-1} differs from (1 + a^2|k|^2)^{-e}.
  const double frac = apply_multiplier(MultiplierSpec::fractional_helmholtz(0.5, 1), v)[0][i].real();
  EXPECT_NEAR(frac, 1.0 / 3.0, 1e-15);
  const double hp = apply_multiplier(MultiplierSpec::helmholtz(-0.5, 1), v)[0][i].real();
  EXPECT_NEAR(hp, 1 / std::sqrt(5.0), 1e-15);
}

TEST(Multiplier, RoleValidation) {
  auto g = make_grid(2, 16);
  Field v = random_divfree_field(g, 1, 0, 1);
  EXPECT_THROW(apply_multiplier(MultiplierSpec::laplacian_power(1, -1), v, OperatorRole::dissipation),
               std::invalid_argument);
  EXPECT_NO_THROW(apply_multiplier(MultiplierSpec::laplacian_power(1, 1), v, OperatorRole::dissipation));
  EXPECT_THROW(apply_multiplier(MultiplierSpec{SymbolFamily::helmholtz_power, -1, -1, 1}, v,
                                OperatorRole::smoothing),
               std::invalid_argument);
}

TEST(Multiplier, CommutesWithProjection) {
  for (int n : {2, 3}) {
    auto g = make_grid(n, 16);
    const Field v = raw_field(g, 7);
    for (const auto& s : {MultiplierSpec::helmholtz(-1, 0.3), MultiplierSpec::laplacian_power(1.5, 2),
                          MultiplierSpec::fractional_helmholtz(0.7, 0.5), MultiplierSpec::voigt(0.2, 0.1)}) {
      EXPECT_LT(rel_diff(apply_multiplier(s, leray_project(v)), leray_project(apply_multiplier(s, v))),
                1e-14);
    }
  }
}

TEST(Sobolev, SingleModeMatchesQuadrature) {
  // One stored coefficient 1 at k = (0,1) in the first component is the real
  // field 2 Re(e^{iy})/(2 pi) = cos(y)/pi; its L2 norm squared over the box is
  // (1/pi^2) * (2 pi)^2 / 2 = 2. Independent quadrature at 32 points per axis.
  auto g = make_grid(2, 16);
  Field v(g);
  v[0][g->index_of({0, 1, 0})] = 1;  // transverse component: divergence-free
  const double n0 = sobolev_norm_sq(v, 0);
  EXPECT_NEAR(n0, 2.0, 1e-14);
  double q = 0;
  const int N = 32;
  const double h = 2 * std::numbers::pi / N;
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) {
      const double y = b * h;
      const double val = 2 * std::cos(y) / (2 * std::numbers::pi);
      q += val * val * h * h;
    }
  EXPECT_NEAR(n0, q, 1e-12);
  EXPECT_NEAR(physical_l2_sq(v), q, 1e-12);
}

TEST(Sobolev, ZeroAndShellExamples) {
  auto g = make_grid(2, 16);
  EXPECT_EQ(sobolev_norm(Field(g), 3.5), 0.0);
  Field v(g);
  v[0][g->index_of({0, 2, 0})] = 1;
  v *= 1 / sobolev_norm(v, 0);
  EXPECT_NEAR(sobolev_norm(v, 1), std::sqrt(5.0), 1e-14);
}

TEST(Sobolev, IsometryParsevalMonotone) {
  for (int n : {2, 3}) {
    auto g = make_grid(n, n == 2 ? 64 : 16);
    for (unsigned seed = 1; seed < 4; ++seed) {
      const Field v = random_divfree_field(g, seed, -1, 2);
      for (double s : {-2.0, -0.5, 0.0, 1.0, 2.5}) {
        const Field lv = apply_multiplier(MultiplierSpec::helmholtz(s / 2, 1), v);
        EXPECT_NEAR(sobolev_norm(lv, 0) / sobolev_norm(v, s), 1.0, 1e-12);
      }
      EXPECT_NEAR(physical_l2_sq(v) / sobolev_norm_sq(v, 0), 1.0, 1e-12);
      double prev = 0;
      for (double s = -3; s <= 3; s += 0.5) {
        const double cur = sobolev_norm(v, s);
        EXPECT_GE(cur, prev);
        prev = cur;
      }
    }
  }
}

TEST(Sobolev, DualityPairing) {
  auto g = make_grid(3, 16);
  for (unsigned seed = 0; seed < 10; ++seed) {
    const Field u = random_divfree_field(g, 2 * seed, -0.5, 1);
    const Field v = random_divfree_field(g, 2 * seed + 1, -1.5, 1);
    for (double s : {-2.0, -1.0, 0.0, 1.0, 2.0})
      EXPECT_LE(std::abs(inner(u, v)), sobolev_norm(u, s) * sobolev_norm(v, -s) * (1 + 1e-14));
  }
}

TEST(Transform, RoundTripAndNonuniformLength) {
  auto g = make_grid(2, 32, 3.0);
  const Field v = random_divfree_field(g, 9, -1, 1.5);
  Field w(g);
  auto phys = physical_values(v);
  for (int c = 0; c < 2; ++c) to_spectral(*g, phys[c].data(), w[c].data());
  EXPECT_LT(rel_diff(v, w), 1e-14);
  EXPECT_NEAR(physical_l2_sq(v) / sobolev_norm_sq(v, 0), 1.0, 1e-12);
}

TEST(Coercivity, StokesConstants) {
  auto g = make_grid(2, 32);
  const double nu = 0.7;
  const auto c = coercivity_constants(MultiplierSpec::laplacian_power(1, nu), MultiplierSpec::identity(),
                                      *g, 1, 0);
  EXPECT_DOUBLE_EQ(c.c_A, nu * 0.5);
  EXPECT_DOUBLE_EQ(c.c_N, 1.0);
  EXPECT_DOUBLE_EQ(c.C_A, 0.0);
  EXPECT_DOUBLE_EQ(c.decay_rate, nu);
}

TEST(Coercivity, VoigtLatticeMinimum) {
  auto g = make_grid(3, 16);
  const double nu = 0.1, alpha = 0.5;
  const auto c = coercivity_constants(MultiplierSpec::voigt(alpha, nu), MultiplierSpec::helmholtz(-1, alpha),
                                      *g, 0, 1);
  // Independent brute force over the integer lattice |m_j| <= 5.
  double ca = 1e300, cn = 1e300;
  for (int a = -5; a <= 5; ++a)
    for (int b = -5; b <= 5; ++b)
      for (int d = -5; d <= 5; ++d) {
        const double k2 = a * a + b * b + d * d;
        if (k2 == 0) continue;
        const double s = 1 / (1 + alpha * alpha * k2);
        ca = std::min(ca, nu * k2 / (1 + alpha * alpha * k2) * s / std::pow(1 + k2, -1.0));
        cn = std::min(cn, s * (1 + k2));
      }
  EXPECT_NEAR(c.c_A, ca, 1e-15);
  EXPECT_NEAR(c.c_N, cn, 1e-15);
  EXPECT_GT(c.c_A, 0);
}

TEST(Coercivity, RejectsDegenerateSymbols) {
  auto g = make_grid(2, 16);
  EXPECT_THROW(coercivity_constants(MultiplierSpec::laplacian_power(1, 0), MultiplierSpec::identity(), *g, 1, 0),
               std::invalid_argument);
}

TEST(RandomField, DeterministicNormalizedDivergenceFree) {
  auto g = make_grid(3, 16);
  const Field a = random_divfree_field(g, 42, -10, 1);
  const Field b = random_divfree_field(g, 42, -10, 1);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < g->spectral_size(); ++i) ASSERT_EQ(a[c][i], b[c][i]);
  EXPECT_NEAR(sobolev_norm(a, 0), 1.0, 1e-12);
  EXPECT_LT(divergence_residual(a), 1e-12);
  const Field banded = random_divfree_field(g, 3, 0, 2, Band{2, 3});
  for (std::size_t i = 0; i < g->spectral_size(); ++i) {
    const double k = std::sqrt(g->k2(i));
    if (k < 2 - 1e-12 || k > 3 + 1e-12) {
      for (int c = 0; c < 3; ++c) EXPECT_EQ(banded[c][i], cplx(0, 0));
    }
  }
}

TEST(RandomField, RealInPhysicalSpace) {
  auto g = make_grid(2, 16);
  Field v = random_divfree_field(g, 5, 0, 1);
  Field w = v;
  enforce_hermitian(w);
  EXPECT_LT(rel_diff(v, w), 1e-15);
}

TEST(Snapshot, RoundTrip) {
  auto g = make_grid(2, 16, 5.0);
  State s{random_divfree_field(g, 1, -1, 1), random_divfree_field(g, 2, -1, 1)};
  s[1].set_kind(FieldKind::magnetic);
  const std::string path = ::testing::TempDir() + "snap.bin";
  write_snapshot(path, s, 1.25, {{"model", "test"}});
  const auto r = read_snapshot(path);
  EXPECT_EQ(r.time, 1.25);
  ASSERT_EQ(r.state.size(), 2u);
  EXPECT_EQ(r.state[1].kind(), FieldKind::magnetic);
  EXPECT_EQ(r.state[0].grid().length(), 5.0);
  for (int b = 0; b < 2; ++b)
    for (int c = 0; c < 2; ++c)
      for (std::size_t i = 0; i < g->spectral_size(); ++i) ASSERT_EQ(r.state[b][c][i], s[b][c][i]);
  EXPECT_EQ(r.header["meta"]["model"], "test");
  std::remove(path.c_str());
}
