#pragma once

// Parameter-range conditions of the model family: Sobolev multiplication,
// boundedness of the trilinear forms, and the well-posedness, attractor and
// determining-operator theorems, evaluated exactly over the rationals.
//
// Each theorem is checked at the level of its hypotheses: every boundedness
// requirement b: V^s1 x V^s2 x V^s3 -> R is translated to the underlying
// form through the smoothing orders of M and N, (s1 + 2 theta1, s2 + 2 theta2, s3),
// and the free orders are eliminated exactly. The simplified inequality
// systems stated alongside each theorem are evaluated too ("remark" level)
// and reported next to the verdict.

#include <array>
#include <cstring>
#include <sstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "linear_system.hpp"
#include "model.hpp"

namespace rnsm {

enum class FormFamily { b1_b3, b2, b4_b5 };

inline std::string to_string(FormFamily f) {
  switch (f) {
    case FormFamily::b1_b3: return "B1/B3";
    case FormFamily::b2: return "B2";
    case FormFamily::b4_b5: return "B4/B5";
  }
  return "?";
}

inline FormFamily family_of(Form f) {
  switch (f) {
    case Form::B1:
    case Form::B3: return FormFamily::b1_b3;
    case Form::B2: return FormFamily::b2;
    default: return FormFamily::b4_b5;
  }
}

inline FormFamily form_family_from(const std::string& s) {
  if (s == "B1" || s == "B3" || s == "B13" || s == "B1/B3") return FormFamily::b1_b3;
  if (s == "B2") return FormFamily::b2;
  if (s == "B4" || s == "B5" || s == "B45" || s == "B4/B5") return FormFamily::b4_b5;
  throw std::invalid_argument("unknown form family '" + s + "'");
}

struct Check {
  std::string label;
  double slack = 0;
  bool strict = false;
  bool satisfied = false;
};

inline Check make_check(std::string label, const Rational& slack, bool strict) {
  return {std::move(label), to_double(slack), strict, strict ? slack > 0 : slack >= 0};
}

inline bool is_nonneg_integer(const Rational& q) { return denominator(q) == 1 && q >= 0; }
inline bool is_nonpos_integer(const Rational& q) { return denominator(q) == 1 && q <= 0; }

struct Admissibility {
  bool admissible = false;
  // Set when only the interchanged variant (s in N_0) holds.
  bool interchanged = false;
  std::vector<Check> checks;
};

// Pointwise multiplication H^s1 x H^s2 -> H^s on T^n:
// s1 + s2 >= 0, s_i >= s, s1 + s2 - s > n/2, where for s in N_0 the last
// two may instead be s_i > s and s1 + s2 - s >= n/2.
inline Admissibility sobolev_mult_admissible(const Rational& s1, const Rational& s2,
                                             const Rational& s, int n) {
  Admissibility a;
  const Rational half_n = Rational(n, 2);
  a.checks = {make_check("s1+s2 >= 0", s1 + s2, false), make_check("s1 >= s", s1 - s, false),
              make_check("s2 >= s", s2 - s, false),
              make_check("s1+s2-s > n/2", s1 + s2 - s - half_n, true)};
  const bool base = a.checks[0].satisfied;
  const bool standard = a.checks[1].satisfied && a.checks[2].satisfied && a.checks[3].satisfied;
  const bool swapped = is_nonneg_integer(s) && s1 > s && s2 > s && s1 + s2 - s >= half_n;
  a.admissible = base && (standard || swapped);
  a.interchanged = base && !standard && swapped;
  return a;
}

inline Admissibility sobolev_mult_admissible(double s1, double s2, double s, int n) {
  return sobolev_mult_admissible(to_rational(s1), to_rational(s2), to_rational(s), n);
}

enum class Relaxation { none, nonpositive_integer, nonstrict_orders };

inline std::string to_string(Relaxation r) {
  switch (r) {
    case Relaxation::none: return "strict";
    case Relaxation::nonpositive_integer: return "nonpositive-integer";
    case Relaxation::nonstrict_orders: return "nonstrict-orders";
  }
  return "?";
}

// How a boundedness condition was met: the k in {0,1} of the pair
// conditions (-1 where the family has none) and the relaxation used for the
// order sum.
struct Route {
  int k = -1;
  Relaxation relaxation = Relaxation::none;
  int integer_slot = -1;  // which order is a nonpositive integer
  std::string use;        // which hypothesis this route serves

  std::string describe() const {
    std::string s = use.empty() ? "" : use + ": ";
    s += to_string(relaxation);
    if (k >= 0) s += " k=" + std::to_string(k);
    if (integer_slot >= 0) s += " slot=" + std::to_string(integer_slot + 1);
    return s;
  }
  bool operator==(const Route&) const = default;
};

namespace detail {

// Pair conditions on (s1,s2,s3) for the given family and k, as (lhs, rhs).
template <class T>
std::vector<std::pair<T, Rational>> pair_conditions(FormFamily f, int k, const T& s1, const T& s2,
                                                    const T& s3) {
  switch (f) {
    case FormFamily::b1_b3: return {{s2 + s3, 1}, {s1 + s3, k}, {s1 + s2, 1 - k}};
    case FormFamily::b2: return {{s2 + s3, 0}, {s1 + s3, 1}, {s1 + s2, 1}};
    case FormFamily::b4_b5: return {{s2 + s3, 1}, {s1 + s3, 1}, {s1 + s2, 1}};
  }
  return {};
}

// Lower bounds on each order that permit the non-strict sum.
inline std::array<Rational, 3> order_floor(FormFamily f, int k) {
  switch (f) {
    case FormFamily::b1_b3: return {0, k, 1 - k};
    case FormFamily::b2: return {1, 0, 0};
    case FormFamily::b4_b5: return {1, k, 1 - k};
  }
  return {};
}

inline std::vector<int> pair_ks(FormFamily f) {
  return f == FormFamily::b1_b3 ? std::vector<int>{0, 1} : std::vector<int>{-1};
}
inline std::vector<int> floor_ks(FormFamily f) {
  return f == FormFamily::b2 ? std::vector<int>{-1} : std::vector<int>{0, 1};
}

const char* const pair_names[3] = {"s2+s3", "s1+s3", "s1+s2"};

}  // namespace detail

struct Boundedness {
  bool bounded = false;
  std::vector<Route> routes;  // every route that works
  std::vector<Check> checks;  // sum and pair conditions for the strict route
};

// Direct evaluation of the boundedness conditions for the underlying form
// b-bar: V^s1 x V^s2 x V^s3 -> R.
inline Boundedness bform_bounded(FormFamily f, const Rational& s1, const Rational& s2,
                                 const Rational& s3, int n) {
  Boundedness b;
  const Rational sum = s1 + s2 + s3, need = Rational(n + 2, 2);
  b.checks.push_back(make_check("s1+s2+s3 > (n+2)/2", sum - need, true));
  const std::array<Rational, 3> s{s1, s2, s3};
  for (int k : detail::pair_ks(f)) {
    const auto pc = detail::pair_conditions<Rational>(f, std::max(k, 0), s1, s2, s3);
    bool pairs = true;
    for (int i = 0; i < 3; ++i) {
      const Rational slack = pc[i].first - pc[i].second;
      pairs = pairs && slack >= 0;
      if (k <= 0)
        b.checks.push_back(make_check(std::string(detail::pair_names[i]) + " >= " +
                                          to_string(pc[i].second),
                                      slack, false));
    }
    if (!pairs) continue;
    if (sum > need) b.routes.push_back({k, Relaxation::none, -1, {}});
    if (sum >= need)
      for (int i = 0; i < 3; ++i)
        if (is_nonpos_integer(s[i])) b.routes.push_back({k, Relaxation::nonpositive_integer, i, {}});
  }
  if (sum >= need)
    for (int k : detail::floor_ks(f)) {
      const auto fl = detail::order_floor(f, std::max(k, 0));
      if (s1 >= fl[0] && s2 >= fl[1] && s3 >= fl[2])
        b.routes.push_back({k, Relaxation::nonstrict_orders, -1, {}});
    }
  b.bounded = !b.routes.empty();
  return b;
}

inline Boundedness bform_bounded(FormFamily f, double s1, double s2, double s3, int n) {
  return bform_bounded(f, to_rational(s1), to_rational(s2), to_rational(s3), n);
}

// Whether a route is valid at concrete orders; an independent re-check used
// to confirm witnesses.
inline bool route_holds(FormFamily f, const Route& r, const Rational& s1, const Rational& s2,
                        const Rational& s3, int n) {
  const auto b = bform_bounded(f, s1, s2, s3, n);
  for (const auto& x : b.routes)
    if (x.k == r.k && x.relaxation == r.relaxation && x.integer_slot == r.integer_slot) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Symbolic encodings

// Integer relaxation branches try s_i = 0, -1, ..., -(depth-1) when s_i is free.
constexpr int kIntegerRelaxationDepth = 6;

struct Branch {
  std::vector<Constraint> constraints;
  Route route;
  // Orders at which the route is claimed; re-checked on witnesses.
  std::array<LinearExpr, 3> orders;
};

inline std::vector<Branch> boundedness_branches(FormFamily f, const LinearExpr& s1,
                                                const LinearExpr& s2, const LinearExpr& s3, int n,
                                                const std::string& use) {
  std::vector<Branch> out;
  const LinearExpr sum = s1 + s2 + s3;
  const Rational need(n + 2, 2);
  const std::array<LinearExpr, 3> s{s1, s2, s3};
  auto pairs = [&](int k) {
    std::vector<Constraint> cs;
    const auto pc = detail::pair_conditions<LinearExpr>(f, std::max(k, 0), s1, s2, s3);
    for (int i = 0; i < 3; ++i)
      cs.push_back(ge(pc[i].first, pc[i].second,
                      use + ": " + detail::pair_names[i] + " >= " + to_string(pc[i].second)));
    return cs;
  };
  for (int k : detail::pair_ks(f)) {
    Branch b{pairs(k), {k, Relaxation::none, -1, use}, s};
    b.constraints.push_back(gt(sum, need, use + ": s1+s2+s3 > (n+2)/2"));
    out.push_back(std::move(b));
  }
  for (int k : detail::floor_ks(f)) {
    const auto fl = detail::order_floor(f, std::max(k, 0));
    Branch b{{}, {k, Relaxation::nonstrict_orders, -1, use}, s};
    b.constraints.push_back(ge(sum, need, use + ": s1+s2+s3 >= (n+2)/2"));
    for (int i = 0; i < 3; ++i)
      b.constraints.push_back(
          ge(s[i], fl[i], use + ": s" + std::to_string(i + 1) + " >= " + to_string(fl[i])));
    out.push_back(std::move(b));
  }
  for (int k : detail::pair_ks(f))
    for (int i = 0; i < 3; ++i) {
      std::vector<Rational> values;
      if (s[i].coef.empty()) {
        if (is_nonpos_integer(s[i].constant)) values.push_back(s[i].constant);
      } else {
        for (int m = 0; m < kIntegerRelaxationDepth; ++m) values.push_back(-m);
      }
      for (const auto& m : values) {
        Branch b{pairs(k), {k, Relaxation::nonpositive_integer, i, use}, s};
        b.constraints.push_back(ge(sum, need, use + ": s1+s2+s3 >= (n+2)/2"));
        b.constraints.push_back(
            eq(s[i], m, use + ": s" + std::to_string(i + 1) + " = " + to_string(m)));
        out.push_back(std::move(b));
      }
    }
  return out;
}

// One conjunctive system with disjunctive groups (pick one branch per group).
struct Encoding {
  std::vector<std::string> vars;
  int param = -1;  // variable whose admissible set is reported
  std::vector<Constraint> base;
  std::vector<std::vector<Branch>> groups;
  FormFamily family = FormFamily::b1_b3;
  int n = 3;
  // When set, the groups after the first meet the first group's variables
  // only through this variable (given the base constraints).
  int link = -1;
};

struct Leaf {
  LinearSystem system{0};
  std::vector<Route> routes;
  std::vector<std::array<LinearExpr, 3>> orders;
  IntervalSet param_set;
};

inline void enumerate_leaves(const Encoding& e, std::size_t g, LinearSystem sys,
                             std::vector<Route>& routes,
                             std::vector<std::array<LinearExpr, 3>>& orders,
                             std::vector<Leaf>& out, bool first_only) {
  if (first_only && !out.empty()) return;
  if (g == e.groups.size()) {
    Leaf leaf{sys, routes, orders, {}};
    if (e.param >= 0) leaf.param_set = sys.project(e.param);
    out.push_back(std::move(leaf));
    return;
  }
  for (const auto& b : e.groups[g]) {
    LinearSystem next = sys;
    next.add(b.constraints);
    if (!next.feasible()) continue;
    routes.push_back(b.route);
    orders.push_back(b.orders);
    enumerate_leaves(e, g + 1, std::move(next), routes, orders, out, first_only);
    routes.pop_back();
    orders.pop_back();
    if (first_only && !out.empty()) return;
  }
}

inline std::vector<Leaf> solve(const Encoding& e, std::optional<Rational> fixed_param = {},
                               bool first_only = false);

inline std::vector<Constraint> interval_constraints(int var, const Interval& iv) {
  std::vector<Constraint> cs;
  const auto x = LinearExpr::variable(var);
  if (iv.lo) cs.push_back(iv.lo_closed ? ge(x, *iv.lo, "link") : gt(x, *iv.lo, "link"));
  if (iv.hi) cs.push_back(iv.hi_closed ? le(x, *iv.hi, "link") : lt(x, *iv.hi, "link"));
  return cs;
}

// All leaves of a linked encoding: the later groups are projected onto the
// link variable and the first group is enumerated against each piece.
inline std::vector<Leaf> solve_linked(const Encoding& e, std::optional<Rational> fixed_param) {
  Encoding rest = e, first = e;
  rest.groups.erase(rest.groups.begin());
  rest.param = e.link;
  rest.link = first.link = -1;
  IntervalSet reach;
  for (const auto& l : solve(rest, fixed_param)) reach.add(l.param_set);
  first.groups.resize(1);
  std::vector<Leaf> out;
  for (const auto& iv : reach.parts()) {
    Encoding piece = first;
    for (auto& c : interval_constraints(e.link, iv)) piece.base.push_back(std::move(c));
    for (auto& l : solve(piece, fixed_param)) out.push_back(std::move(l));
  }
  return out;
}

inline std::vector<Leaf> solve(const Encoding& e, std::optional<Rational> fixed_param,
                               bool first_only) {
  if (e.link >= 0 && e.groups.size() > 1 && !first_only) return solve_linked(e, fixed_param);
  LinearSystem sys(static_cast<int>(e.vars.size()), e.base);
  if (fixed_param && e.param >= 0)
    sys.add(eq(LinearExpr::variable(e.param), *fixed_param, "queried " + e.vars[e.param]));
  std::vector<Leaf> out;
  if (!sys.feasible()) return out;
  std::vector<Route> routes;
  std::vector<std::array<LinearExpr, 3>> orders;
  enumerate_leaves(e, 0, sys, routes, orders, out, first_only);
  return out;
}

// ---------------------------------------------------------------------------
// Theorems

enum class TheoremId {
  existence_a,
  existence_b_local,
  uniqueness_a,
  uniqueness_b,
  regularity,
  attractor_iii,
  attractor_corollary,
  determining_dissipative,
  determining_nondissipative,
};

inline const std::vector<TheoremId>& all_theorems() {
  static const std::vector<TheoremId> ids{
      TheoremId::existence_a,         TheoremId::existence_b_local,
      TheoremId::uniqueness_a,        TheoremId::uniqueness_b,
      TheoremId::regularity,          TheoremId::attractor_iii,
      TheoremId::attractor_corollary, TheoremId::determining_dissipative,
      TheoremId::determining_nondissipative};
  return ids;
}

inline std::string to_string(TheoremId id) {
  switch (id) {
    case TheoremId::existence_a: return "existence-a";
    case TheoremId::existence_b_local: return "existence-b-local";
    case TheoremId::uniqueness_a: return "uniqueness-a";
    case TheoremId::uniqueness_b: return "uniqueness-b";
    case TheoremId::regularity: return "regularity";
    case TheoremId::attractor_iii: return "attractor-iii";
    case TheoremId::attractor_corollary: return "attractor-corollary";
    case TheoremId::determining_dissipative: return "determining-dissipative";
    case TheoremId::determining_nondissipative: return "determining-nondissipative";
  }
  return "?";
}

inline TheoremId theorem_from(const std::string& s) {
  for (auto id : all_theorems())
    if (to_string(id) == s) return id;
  throw std::invalid_argument("unknown theorem id '" + s + "'");
}

enum class Verdict { holds, fails, not_applicable };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::not_applicable: return "not-applicable";
  }
  return "?";
}

struct RegimeParams {
  Rational theta, theta1, theta2;
  FormFamily family = FormFamily::b1_b3;
  int n = 3;
  std::string label = "custom";
  std::string form = "B1";
  bool exact = true;  // all exponents representable exactly
};

inline RegimeParams regime_params(double theta, double theta1, double theta2, Form form, int n,
                                  std::string label = "custom") {
  if (n != 2 && n != 3) throw std::invalid_argument("dimension must be 2 or 3");
  RegimeParams r;
  bool e0 = true, e1 = true, e2 = true;
  r.theta = to_rational(theta, &e0);
  r.theta1 = to_rational(theta1, &e1);
  r.theta2 = to_rational(theta2, &e2);
  r.exact = e0 && e1 && e2;
  r.family = family_of(form);
  r.form = to_string(form);
  r.n = n;
  r.label = std::move(label);
  return r;
}

inline RegimeParams regime_params(const ModelParams& p, int n) {
  return regime_params(p.theta, p.theta1, p.theta2, p.family(), n, p.label);
}

struct TheoremResult {
  TheoremId id{};
  Verdict verdict = Verdict::fails;
  // Inputs were not exactly rational and a queried value sits within 1e-12
  // of an endpoint.
  bool boundary = false;
  std::string parameter;                // "beta", "alpha", or empty
  std::optional<IntervalSet> admissible;
  std::optional<double> queried;
  std::vector<Route> witness;           // routes of one satisfying branch
  // Orders (s1,s2,s3) on the underlying form at which each route is claimed.
  std::vector<std::array<Rational, 3>> witness_orders;
  std::map<std::string, double> witness_point;
  std::vector<Check> inequalities;      // hypothesis-level, at the witness point
  Verdict remark_verdict = Verdict::fails;
  std::optional<IntervalSet> remark_admissible;
  std::vector<Route> remark_witness;
  std::vector<Check> remark_inequalities;
  std::map<std::string, Rational> values;
  std::vector<std::string> notes;

  std::vector<int> witness_k() const {
    std::vector<int> ks;
    for (const auto& r : witness)
      if (r.k >= 0) ks.push_back(r.k);
    return ks;
  }
};

namespace detail {

using E = LinearExpr;
inline E var(int i) { return LinearExpr::variable(i); }

// Effective orders on the underlying form when b = bbar(M., N., .).
inline std::array<E, 3> eff(const RegimeParams& p, const E& s1, const E& s2, const E& s3) {
  return {s1 + E(2 * p.theta1), s2 + E(2 * p.theta2), s3};
}

inline std::vector<Branch> bounded(const RegimeParams& p, const std::array<E, 3>& s,
                                   const std::string& use) {
  return boundedness_branches(p.family, s[0], s[1], s[2], p.n, use);
}

// --- hypothesis-level encodings ---

inline Encoding existence_a(const RegimeParams& p) {
  // s1, s2, gamma, sb1, sb2, gb, s1+s2
  Encoding e{{"s1", "s2", "gamma", "sb1", "sb2", "gb", "ssum"}, -1, {}, {}, p.family, p.n};
  const E T(p.theta), T2(p.theta2);
  for (int i : {0, 1}) {
    e.base.push_back(ge(var(i), -T2, "i: s" + std::to_string(i + 1) + " >= -theta2"));
    e.base.push_back(le(var(i), T - T2, "i: s" + std::to_string(i + 1) + " <= theta-theta2"));
    e.base.push_back(lt(var(3 + i), T - T2, "iii: sb" + std::to_string(i + 1) + " < theta-theta2"));
  }
  e.base.push_back(ge(var(2), T + T2, "i: gamma >= theta+theta2"));
  e.base.push_back(gt(var(2), T2, "i: gamma > theta2"));
  e.base.push_back(ge(var(5), var(2), "iii: gb >= gamma"));
  e.base.push_back(eq(var(6), var(0) + var(1), "ssum = s1+s2"));
  e.groups.push_back(bounded(p, eff(p, var(0), var(1), var(2)), "i"));
  e.groups.push_back(bounded(p, eff(p, var(3), var(4), var(5)), "iii"));
  e.link = 2;
  return e;
}

inline Encoding existence_b_local(const RegimeParams& p) {
  Encoding e{{"beta", "s", "gamma"}, 0, {}, {}, p.family, p.n};
  const E T(p.theta), T2(p.theta2), b = var(0);
  e.base.push_back(ge(b, -T2, "beta >= -theta2"));
  e.base.push_back(lt(var(1), T + b, "iii: s < theta+beta"));
  e.base.push_back(ge(var(2), T - b, "iii: gamma >= theta-beta"));
  e.groups.push_back(bounded(p, eff(p, b, b, T - b), "i"));
  e.groups.push_back(bounded(p, eff(p, var(1), var(1), var(2)), "iii"));
  e.link = 0;
  return e;
}

// b: V^s1 x V^{theta-theta2} x V^s2 with s1 <= theta-theta2, s2 <= theta+theta2,
// s1+s2 <= theta; shared by uniqueness-a and the attractor corollary.
inline Encoding uniqueness_a(const RegimeParams& p) {
  Encoding e{{"s1", "s2"}, -1, {}, {}, p.family, p.n};
  const E T(p.theta), T2(p.theta2);
  e.base.push_back(le(var(0), T - T2, "s1 <= theta-theta2"));
  e.base.push_back(le(var(1), T + T2, "s2 <= theta+theta2"));
  e.base.push_back(le(var(0) + var(1), T, "s1+s2 <= theta"));
  e.groups.push_back(bounded(p, eff(p, var(0), T - T2, var(1)), "a"));
  return e;
}

inline Encoding uniqueness_b(const RegimeParams& p) {
  Encoding e{{"beta"}, 0, {}, {}, p.family, p.n};
  const E T(p.theta), T2(p.theta2), b = var(0);
  e.base.push_back(ge(b, -T2, "beta >= -theta2"));
  e.groups.push_back(bounded(p, eff(p, b, b, T - b), "b"));
  return e;
}

// alpha = min(beta, theta-theta2) splits into two cases.
inline std::vector<Encoding> regularity(const RegimeParams& p) {
  const E T(p.theta), T2(p.theta2), b = var(0);
  Encoding lo{{"beta"}, 0, {}, {}, p.family, p.n};
  lo.base.push_back(gt(b, -T2, "beta > -theta2"));
  lo.base.push_back(le(b, T - T2, "beta <= theta-theta2"));
  lo.groups.push_back(bounded(p, eff(p, b, b, T - b), "i"));
  Encoding hi{{"beta"}, 0, {}, {}, p.family, p.n};
  hi.base.push_back(gt(b, -T2, "beta > -theta2"));
  hi.base.push_back(ge(b, T - T2, "beta >= theta-theta2"));
  hi.groups.push_back(bounded(p, eff(p, T - T2, T - T2, T - b), "i"));
  return {lo, hi};
}

inline Encoding attractor_iii(const RegimeParams& p) {
  Encoding e{{"beta"}, 0, {}, {}, p.family, p.n};
  const E T(p.theta), T2(p.theta2), b = var(0);
  e.base.push_back(ge(b, -T2, "beta >= -theta2"));
  e.base.push_back(le(b, T - T2, "beta <= theta-theta2"));
  e.groups.push_back(bounded(p, eff(p, b, b, T - b), "iii"));
  return e;
}

// Corollary iii): some sb_i < theta-theta2 and any gb.
inline Encoding corollary_iii(const RegimeParams& p) {
  Encoding e{{"sb1", "sb2", "gb"}, -1, {}, {}, p.family, p.n};
  const E T(p.theta), T2(p.theta2);
  e.base.push_back(lt(var(0), T - T2, "sb1 < theta-theta2"));
  e.base.push_back(lt(var(1), T - T2, "sb2 < theta-theta2"));
  e.groups.push_back(bounded(p, eff(p, var(0), var(1), var(2)), "iii"));
  return e;
}

// beta = theta-theta2 from the absorbing ball, and p = theta/(theta-s1-s2) <= 2
// so the time average of ||u||_beta^p is controlled by that of ||u||_beta^2.
inline Encoding determining_dissipative(const RegimeParams& p) {
  Encoding e{{"s1", "s2"}, -1, {}, {}, p.family, p.n};
  const E T(p.theta), T2(p.theta2);
  e.base.push_back(le(var(0), T - T2, "s1 <= theta-theta2"));
  e.base.push_back(le(var(1), T + T2, "s2 <= theta+theta2"));
  e.base.push_back(lt(var(0) + var(1), T, "s1+s2 < theta"));
  e.base.push_back(le(var(0) + var(1), Rational(1, 2) * T, "p <= 2: s1+s2 <= theta/2"));
  e.groups.push_back(bounded(p, eff(p, var(0), T - T2, var(1)), "i"));
  return e;
}

// theta = 0; beta = -theta2 from the absorbing ball; alpha <= -theta2.
inline Encoding determining_nondissipative(const RegimeParams& p) {
  Encoding e{{"alpha"}, 0, {}, {}, p.family, p.n};
  const E T2(p.theta2), a = var(0);
  e.base.push_back(le(a, -T2, "alpha <= -theta2"));
  e.groups.push_back(bounded(p, eff(p, a, -T2, T2), "i"));
  return e;
}

// --- remark-level encodings ---
// Each group is a choice of k (or l); family-specific constants fill in.

inline Branch remark_branch(std::vector<Constraint> cs, int k, const std::string& use = {}) {
  return Branch{std::move(cs), {k, Relaxation::none, -1, use}, {}};
}

inline Rational half() { return Rational(1, 2); }

inline Encoding remark(const RegimeParams& p, TheoremId id) {
  const E T(p.theta), T1(p.theta1), T2(p.theta2);
  const Rational np2(p.n + 2, 2);
  const bool b13 = p.family == FormFamily::b1_b3, b2 = p.family == FormFamily::b2;
  Encoding e{{"beta"}, -1, {}, {}, p.family, p.n};
  auto k_group = [&](auto make) {
    std::vector<Branch> g;
    if (b13)
      for (int k : {0, 1}) g.push_back(remark_branch(make(k), k, "k"));
    else
      g.push_back(remark_branch(make(-1), -1));
    e.groups.push_back(std::move(g));
  };
  const E b = var(0);
  switch (id) {
    case TheoremId::existence_a:
      e.base.push_back(gt(T + T1, half(), "theta+theta1 > 1/2"));
      break;
    case TheoremId::existence_b_local:
    case TheoremId::uniqueness_b:
      e.param = 0;
      e.base.push_back(ge(b, -T2, "beta >= -theta2"));
      e.base.push_back(gt(b, E(np2) - T - 2 * (p.theta1 + p.theta2),
                          "beta > (n+2)/2-theta-2(theta1+theta2)"));
      k_group([&](int k) {
        const Rational kk = b13 ? Rational(k) : Rational(1);
        const Rational low2 = b2 ? Rational(0) : Rational(1);
        const Rational lowb = b13 ? Rational(1 - k, 2) : half();
        return std::vector<Constraint>{
            ge(T + 2 * p.theta1, kk, "theta+2theta1 >= " + to_string(kk)),
            ge(T + 2 * p.theta2, low2, "theta+2theta2 >= " + to_string(low2)),
            ge(b, E(lowb) - T1 - T2, "beta >= " + to_string(lowb) + "-theta1-theta2")};
      });
      break;
    case TheoremId::uniqueness_a:
      e.base.push_back(gt(2 * p.theta + 2 * p.theta1 + p.theta2, np2,
                          "2theta+2theta1+theta2 > (n+2)/2"));
      k_group([&](int k) {
        if (b13)
          return std::vector<Constraint>{
              ge(T + T1, Rational(1 - k, 2), "theta+theta1 >= (1-k)/2"),
              ge(T + 2 * p.theta1, k, "theta+2theta1 >= k"),
              ge(T + T2, half(), "theta+theta2 >= 1/2"),
              ge(3 * p.theta + 2 * p.theta1 + 2 * p.theta2, 2 - k,
                 "3theta+2theta1+2theta2 >= 2-k")};
        const Rational t2low = b2 ? Rational(0) : half();
        const Rational last = b2 ? Rational(1) : Rational(2);
        return std::vector<Constraint>{
            ge(T + 2 * p.theta1, 1, "theta+2theta1 >= 1"),
            ge(T + T1, half(), "theta+theta1 >= 1/2"),
            ge(T + T2, t2low, "theta+theta2 >= " + to_string(t2low)),
            ge(3 * p.theta + 2 * p.theta1 + 2 * p.theta2, last,
               "3theta+2theta1+2theta2 >= " + to_string(last))};
      });
      break;
    case TheoremId::regularity: {
      e.param = 0;
      e.base.push_back(gt(b, -T2, "beta > -theta2"));
      e.base.push_back(gt(4 * p.theta + 4 * p.theta1 + 2 * p.theta2, p.n + 2,
                          "4theta+4theta1+2theta2 > n+2"));
      e.base.push_back(gt(b, E(np2) - 2 * (p.theta1 + p.theta2) - T,
                          "beta > (n+2)/2-2(theta1+theta2)-theta"));
      e.base.push_back(lt(b, 3 * p.theta + 2 * p.theta1 - np2, "beta < 3theta+2theta1-(n+2)/2"));
      if (b13) {
        e.base.push_back(ge(T + 2 * p.theta2, 1, "theta+2theta2 >= 1"));
        e.base.push_back(ge(3 * p.theta + 4 * p.theta1, 1, "3theta+4theta1 >= 1"));
        e.base.push_back(le(b, 2 * p.theta + p.theta2 - 1, "beta <= 2theta+theta2-1"));
        std::vector<Branch> gk, gl;
        for (int k : {0, 1})
          gk.push_back(remark_branch(
              {ge(2 * p.theta + 2 * p.theta1, 1 - k, "2theta+2theta1 >= 1-k"),
               le(b, 2 * p.theta - p.theta2 + 2 * p.theta1 - k, "beta <= 2theta-theta2+2theta1-k")},
              k, "k"));
        for (int l : {0, 1})
          gl.push_back(remark_branch(
              {ge(T + 2 * p.theta1, l, "theta+2theta1 >= l"),
               ge(3 * p.theta + 2 * p.theta1 + 2 * p.theta2, 2 - l, "3theta+2theta1+2theta2 >= 2-l"),
               ge(b, E(Rational(1 - l, 2)) - T1 - T2, "beta >= (1-l)/2-theta1-theta2")},
              l, "l"));
        e.groups.push_back(gk);
        e.groups.push_back(gl);
      } else {
        const Rational low2 = b2 ? Rational(0) : Rational(1);
        const Rational up = b2 ? Rational(0) : Rational(-1);
        e.base.push_back(ge(T + 2 * p.theta2, low2, "theta+2theta2 >= " + to_string(low2)));
        e.base.push_back(ge(T + 2 * p.theta1, 1, "theta+2theta1 >= 1"));
        e.base.push_back(ge(b, E(half()) - T1 - T2, "beta >= 1/2-theta1-theta2"));
        e.base.push_back(le(b, 2 * p.theta + p.theta2 + up, "beta <= 2theta+theta2" +
                                                                 std::string(b2 ? "" : "-1")));
        e.base.push_back(
            le(b, 2 * p.theta - p.theta2 + 2 * p.theta1 - 1, "beta <= 2theta-theta2+2theta1-1"));
      }
      break;
    }
    case TheoremId::attractor_iii:
      e.base.push_back(gt(2 * p.theta, np2 - 2 * p.theta1 - p.theta2,
                          "2theta > (n+2)/2-2theta1-theta2"));
      k_group([&](int k) {
        if (b13)
          return std::vector<Constraint>{ge(2 * p.theta + 2 * p.theta1, 1 - k, "2theta+2theta1 >= 1-k"),
                                         ge(2 * p.theta2 + p.theta, 1, "2theta2+theta >= 1"),
                                         ge(2 * p.theta1 + p.theta, k, "2theta1+theta >= k")};
        const Rational low2 = b2 ? Rational(0) : Rational(1);
        return std::vector<Constraint>{
            ge(2 * p.theta + 2 * p.theta1, 1, "2theta+2theta1 >= 1"),
            ge(2 * p.theta2 + p.theta, low2, "2theta2+theta >= " + to_string(low2)),
            ge(2 * p.theta1 + p.theta, 1, "2theta1+theta >= 1")};
      });
      break;
    case TheoremId::determining_dissipative: {
      // The rotational form's sum carries 2theta2 where the others carry theta2.
      const Rational lead = Rational(3, 2) * p.theta + 2 * p.theta1 + (b2 ? 2 : 1) * p.theta2;
      e.base.push_back(gt(lead, np2, b2 ? "3theta/2+2theta1+2theta2 > (n+2)/2"
                                        : "3theta/2+2theta1+theta2 > (n+2)/2"));
      k_group([&](int k) {
        const Rational kk = b13 ? Rational(k) : Rational(1);
        const Rational t2low = b2 ? Rational(0) : half();
        const Rational t1low = b13 ? Rational(1 - k, 2) : half();
        return std::vector<Constraint>{
            ge(T + T2, t2low, "theta+theta2 >= " + to_string(t2low)),
            gt(Rational(1, 2) * p.theta + 2 * p.theta1, kk, "theta/2+2theta1 > " + to_string(kk)),
            ge(T + T1, t1low, "theta+theta1 >= " + to_string(t1low))};
      });
      break;
    }
    case TheoremId::determining_nondissipative: {
      e.vars = {"alpha"};
      e.param = 0;
      const E a = var(0);
      const Rational beta = -p.theta2;
      e.base.push_back(le(a, -T2, "alpha <= -theta2"));
      e.base.push_back(gt(beta + 2 * p.theta1 + 2 * p.theta2, np2, "beta+2theta1+2theta2 > (n+2)/2"));
      e.base.push_back(gt(a, E(np2) - 2 * p.theta1 - beta - 3 * p.theta2,
                          "alpha > (n+2)/2-2theta1-beta-3theta2"));
      k_group([&](int k) {
        const Rational kk = b13 ? Rational(k) : Rational(1);
        const Rational low3 = b2 ? Rational(0) : Rational(1);
        const Rational low4 = b13 ? Rational(1 - k) : Rational(1);
        std::vector<Constraint> cs{
            ge(beta + 3 * p.theta2, low3, "beta+3theta2 >= " + to_string(low3)),
            gt(2 * p.theta1, kk, "2theta1 > " + to_string(kk)),
            ge(2 * p.theta1 + beta + p.theta2, low4, "2theta1+beta+theta2 >= " + to_string(low4)),
            ge(a, E(b13 ? Rational(k) : Rational(1)) - 2 * p.theta1 - T2,
               b13 ? "alpha >= k-2theta1-theta2" : "alpha >= 1-2theta1-theta2"),
            ge(a, E(b13 ? Rational(1 - k) : Rational(1)) - 2 * p.theta1 - beta - 2 * p.theta2,
               b13 ? "alpha >= 1-k-2theta1-beta-2theta2" : "alpha >= 1-2theta1-beta-2theta2")};
        return cs;
      });
      break;
    }
    case TheoremId::attractor_corollary:
      break;  // combined from the parts by the caller
  }
  return e;
}

inline std::vector<Check> evaluate(const LinearSystem& sys, const std::vector<Rational>& x) {
  std::vector<Check> out;
  for (const auto& c : sys.constraints()) {
    const Rational v = c.expr.eval(x);
    Check ch{c.label, to_double(v), c.rel == Relation::gt,
             c.rel == Relation::gt ? v > 0 : c.rel == Relation::ge ? v >= 0 : v == 0};
    out.push_back(std::move(ch));
  }
  return out;
}

struct Solved {
  bool feasible = false;
  IntervalSet set;
  std::vector<Leaf> leaves;
};

inline Solved solve_all(const std::vector<Encoding>& cases, std::optional<Rational> fixed,
                        bool first_only) {
  Solved s;
  for (const auto& e : cases) {
    auto leaves = solve(e, fixed, first_only);
    for (auto& l : leaves) {
      s.set.add(l.param_set);
      s.leaves.push_back(std::move(l));
    }
    if (first_only && !s.leaves.empty()) break;
  }
  s.feasible = !s.leaves.empty();
  return s;
}

// Fills witness information from the first leaf (with the parameter fixed
// at a representative point when it is free).
inline void fill_witness(const Encoding& e, const Solved& s, std::optional<Rational> fixed,
                         std::vector<Route>& routes, std::map<std::string, double>* point,
                         std::vector<Check>& checks,
                         std::vector<std::array<Rational, 3>>* orders = nullptr) {
  if (s.leaves.empty()) return;
  const Leaf* leaf = &s.leaves.front();
  LinearSystem sys = leaf->system;
  if (e.param >= 0 && !fixed) {
    const Rational at = leaf->param_set.empty() ? Rational(0) : leaf->param_set.parts().front().pick();
    sys.add(eq(LinearExpr::variable(e.param), at, "witness " + e.vars[e.param]));
  }
  const auto x = sys.solve_point();
  routes = leaf->routes;
  if (!x) return;
  if (point)
    for (std::size_t i = 0; i < e.vars.size(); ++i) (*point)[e.vars[i]] = to_double((*x)[i]);
  checks = evaluate(leaf->system, *x);
  if (orders)
    for (const auto& o : leaf->orders) orders->push_back({o[0].eval(*x), o[1].eval(*x), o[2].eval(*x)});
}

}  // namespace detail

// Hypothesis-level and remark-level verdicts for one theorem. When the
// theorem is parameterized (beta, or alpha for the non-dissipative case) and
// `param` is omitted the admissible set is computed and the verdict holds
// iff it is nonempty.
inline TheoremResult check_theorem(TheoremId id, const RegimeParams& p,
                                   std::optional<double> param = std::nullopt) {
  using namespace detail;
  TheoremResult r;
  r.id = id;
  const bool dissipative = p.theta > 0;
  if ((id == TheoremId::determining_dissipative && !dissipative) ||
      (id == TheoremId::determining_nondissipative && p.theta != 0)) {
    r.verdict = r.remark_verdict = Verdict::not_applicable;
    r.notes.push_back(id == TheoremId::determining_dissipative ? "requires theta > 0"
                                                               : "requires theta = 0");
    return r;
  }
  std::optional<Rational> fixed;
  bool exact_query = true;
  if (param) {
    fixed = to_rational(*param, &exact_query);
    r.queried = param;
  }

  // Corollary: uniqueness-a, corollary iii), attractor iii).
  if (id == TheoremId::attractor_corollary) {
    const auto ua = check_theorem(TheoremId::uniqueness_a, p);
    const auto at = check_theorem(TheoremId::attractor_iii, p);
    const Encoding ci = corollary_iii(p);
    const auto sc = solve_all({ci}, {}, true);
    std::vector<Route> cr;
    std::vector<Check> cc;
    std::map<std::string, double> cp;
    std::vector<std::array<Rational, 3>> co;
    fill_witness(ci, sc, {}, cr, &cp, cc, &co);
    const bool holds = ua.verdict == Verdict::holds && sc.feasible && at.verdict == Verdict::holds;
    r.verdict = holds ? Verdict::holds : Verdict::fails;
    for (const auto* part : {&ua, &at}) {
      r.witness.insert(r.witness.end(), part->witness.begin(), part->witness.end());
      r.witness_orders.insert(r.witness_orders.end(), part->witness_orders.begin(),
                              part->witness_orders.end());
      r.inequalities.insert(r.inequalities.end(), part->inequalities.begin(), part->inequalities.end());
      for (const auto& [k, v] : part->witness_point) r.witness_point[to_string(part->id) + "." + k] = v;
    }
    r.witness.insert(r.witness.end(), cr.begin(), cr.end());
    r.witness_orders.insert(r.witness_orders.end(), co.begin(), co.end());
    r.inequalities.insert(r.inequalities.end(), cc.begin(), cc.end());
    for (const auto& [k, v] : cp) r.witness_point["corollary-iii." + k] = v;
    if (ua.verdict != Verdict::holds) r.notes.push_back("uniqueness-a hypothesis fails");
    if (!sc.feasible) r.notes.push_back("second boundedness condition fails");
    if (at.verdict != Verdict::holds) r.notes.push_back("attractor-iii fails");
    const bool rem = ua.remark_verdict == Verdict::holds && at.remark_verdict == Verdict::holds;
    r.remark_verdict = rem ? Verdict::holds : Verdict::fails;
    r.remark_inequalities = ua.remark_inequalities;
    r.remark_inequalities.insert(r.remark_inequalities.end(), at.remark_inequalities.begin(),
                                 at.remark_inequalities.end());
    return r;
  }

  std::vector<Encoding> cases;
  switch (id) {
    case TheoremId::existence_a: cases = {existence_a(p)}; break;
    case TheoremId::existence_b_local: cases = {existence_b_local(p)}; break;
    case TheoremId::uniqueness_a: cases = {uniqueness_a(p)}; break;
    case TheoremId::uniqueness_b: cases = {uniqueness_b(p)}; break;
    case TheoremId::regularity: cases = regularity(p); break;
    case TheoremId::attractor_iii: cases = {attractor_iii(p)}; break;
    case TheoremId::determining_dissipative: cases = {determining_dissipative(p)}; break;
    case TheoremId::determining_nondissipative: cases = {determining_nondissipative(p)}; break;
    case TheoremId::attractor_corollary: break;
  }
  const bool parameterized = cases.front().param >= 0;
  if (parameterized) r.parameter = cases.front().vars[cases.front().param];
  const bool need_all = id == TheoremId::existence_a || (parameterized && !fixed);

  const Solved s = solve_all(cases, parameterized ? fixed : std::nullopt, !need_all);
  r.verdict = s.feasible ? Verdict::holds : Verdict::fails;
  if (parameterized && !fixed) r.admissible = s.set;
  // Witness from the first case that produced a leaf.
  for (const auto& e : cases) {
    const Solved one = solve_all({e}, parameterized ? fixed : std::nullopt, true);
    if (!one.feasible) continue;
    Solved w = one;
    if (parameterized && !fixed) w.leaves.front().param_set = one.leaves.front().system.project(e.param);
    fill_witness(e, w, parameterized ? fixed : std::nullopt, r.witness, &r.witness_point,
                 r.inequalities, &r.witness_orders);
    break;
  }

  if (id == TheoremId::existence_a && s.feasible) {
    r.values["a"] = -p.theta2;
    r.values["b"] = p.theta - p.theta2;
    // Least gamma, then the best time integrability p at that gamma.
    IntervalSet gammas;
    std::vector<IntervalSet> per_leaf;
    for (const auto& l : s.leaves) {
      per_leaf.push_back(l.system.project(2));
      gammas.add(per_leaf.back());
    }
    const Interval& g0 = gammas.parts().front();
    r.values["gamma"] = *g0.lo;
    if (!g0.lo_closed) r.notes.push_back("gamma infimum not attained: gamma > " + to_string(*g0.lo));
    std::optional<Rational> smin;
    for (std::size_t i = 0; i < s.leaves.size(); ++i) {
      if (per_leaf[i].empty() || per_leaf[i].parts().front().lo != g0.lo) continue;
      LinearSystem sys = s.leaves[i].system;
      if (g0.lo_closed) sys.add(eq(LinearExpr::variable(2), *g0.lo));
      const auto proj = sys.project(6);
      if (proj.empty()) continue;
      const auto& lo = proj.parts().front().lo;
      if (!lo) { smin.reset(); break; }
      if (!smin || *lo < *smin) smin = *lo;
    }
    Rational pval = 2;
    if (p.theta > 0 && smin && *smin + 2 * p.theta2 > 0)
      pval = std::min(Rational(2), 2 * p.theta / (*smin + 2 * p.theta2));
    r.values["p"] = pval;
    r.values["gamma_open"] = g0.lo_closed ? 0 : 1;
  }
  if (id == TheoremId::uniqueness_a && s.feasible) r.values["beta"] = -p.theta2;
  if (id == TheoremId::determining_dissipative && s.feasible)
    r.values["mode_exponent"] = Rational(p.n) / p.theta;  // m ~ G^{n/theta}
  if (id == TheoremId::determining_nondissipative && s.feasible && !fixed) {
    const auto& first = s.set.parts().front();
    if (first.lo && *first.lo + p.theta2 < 0)
      r.values["mode_exponent"] = -Rational(p.n) / (p.theta2 + *first.lo);  // m ~ G^{-n/(theta2+alpha)}
  }
  if (id == TheoremId::existence_a && p.label == "NS-alpha-like") {
    const Rational cap = std::max({-p.theta2 - Rational(1, 2), p.theta2 + Rational(1, 2), Rational(p.n, 2)});
    r.notes.push_back("table caption bound gamma >= max{-theta2-1/2, theta2+1/2, n/2} = " +
                      to_string(cap));
  }

  // Remark level.
  const Encoding rem = remark(p, id);
  const auto rs = solve_all({rem}, rem.param >= 0 ? fixed : std::nullopt, rem.param < 0 || fixed.has_value());
  r.remark_verdict = rs.feasible ? Verdict::holds : Verdict::fails;
  if (rem.param >= 0 && !fixed) r.remark_admissible = rs.set;
  if (rs.feasible) {
    Solved w = rs;
    fill_witness(rem, w, rem.param >= 0 ? fixed : std::nullopt, r.remark_witness, nullptr,
                 r.remark_inequalities);
  } else {
    // Report every inequality that does not involve the parameter, at k = 0.
    std::vector<Constraint> cs = rem.base;
    for (const auto& g : rem.groups) cs.insert(cs.end(), g.front().constraints.begin(), g.front().constraints.end());
    std::vector<Rational> x(rem.vars.size(), fixed.value_or(Rational(0)));
    for (const auto& c : cs)
      if (fixed || rem.param < 0 || c.expr.coefficient(rem.param) == 0)
        r.remark_inequalities.push_back(detail::evaluate(LinearSystem(static_cast<int>(x.size()), {c}), x).front());
  }

  if (!p.exact || !exact_query) {
    r.notes.push_back("parameters approximated by rationals");
    if (param) {
      const auto near = [&](const std::optional<Rational>& e) {
        return e && std::abs(to_double(*e) - *param) < 1e-12;
      };
      const Solved full = solve_all(cases, std::nullopt, false);
      for (const auto& iv : full.set.parts())
        if (near(iv.lo) || near(iv.hi)) r.boundary = true;
    }
  }
  return r;
}

inline TheoremResult check_theorem(TheoremId id, const ModelParams& m, int n,
                                   std::optional<double> param = std::nullopt) {
  return check_theorem(id, regime_params(m, n), param);
}

struct RegimeReport {
  RegimeParams params;
  std::vector<TheoremResult> results;

  const TheoremResult& at(TheoremId id) const {
    for (const auto& r : results)
      if (r.id == id) return r;
    throw std::out_of_range("theorem not in report");
  }

  // Uniqueness in V^beta: part b)'s set plus beta = -theta2 from part a).
  IntervalSet uniqueness_set() const {
    IntervalSet s = at(TheoremId::uniqueness_b).admissible.value_or(IntervalSet{});
    if (at(TheoremId::uniqueness_a).verdict == Verdict::holds) {
      Interval pt;
      pt.lo = pt.hi = -params.theta2;
      pt.lo_closed = pt.hi_closed = true;
      s.add(pt);
    }
    return s;
  }
};

inline RegimeReport full_report(const RegimeParams& p) {
  RegimeReport rep{p, {}};
  for (auto id : all_theorems()) rep.results.push_back(check_theorem(id, p));
  return rep;
}

inline RegimeReport full_report(const ModelParams& m, int n) { return full_report(regime_params(m, n)); }


// ---------------------------------------------------------------------------
// Output

// "beta >= 0" -> "β ≥ 0".
inline std::string pretty(std::string s) {
  const std::pair<const char*, const char*> subs[] = {
      {">=", "≥"}, {"<=", "≤"}, {"beta", "β"}, {"alpha", "α"}, {"gamma", "γ"}, {"theta", "θ"}};
  for (const auto& [from, to] : subs)
    for (std::size_t at = s.find(from); at != std::string::npos; at = s.find(from, at))
      s.replace(at, std::strlen(from), to);
  return s;
}

inline nlohmann::json to_json(const Check& c) {
  return {{"label", c.label}, {"slack", c.slack}, {"strict", c.strict}, {"satisfied", c.satisfied}};
}

inline nlohmann::json to_json(const IntervalSet& s) {
  nlohmann::json parts = nlohmann::json::array();
  for (const auto& iv : s.parts()) {
    nlohmann::json j;
    j["lo"] = iv.lo ? nlohmann::json(to_string(*iv.lo)) : nlohmann::json(nullptr);
    j["hi"] = iv.hi ? nlohmann::json(to_string(*iv.hi)) : nlohmann::json(nullptr);
    j["lo_closed"] = iv.lo_closed;
    j["hi_closed"] = iv.hi_closed;
    parts.push_back(j);
  }
  return parts;
}

inline nlohmann::json to_json(const TheoremResult& r) {
  nlohmann::json j;
  j["verdict"] = to_string(r.verdict);
  j["boundary"] = r.boundary;
  if (!r.parameter.empty()) j["parameter"] = r.parameter;
  if (r.queried) j["queried"] = *r.queried;
  if (r.admissible) {
    j["admissible"] = to_json(*r.admissible);
    j["admissible_text"] = r.admissible->describe(r.parameter);
  }
  j["witness_k"] = r.witness_k();
  nlohmann::json routes = nlohmann::json::array();
  for (const auto& w : r.witness) routes.push_back(w.describe());
  j["witness_routes"] = routes;
  j["witness_point"] = r.witness_point;
  nlohmann::json ineq = nlohmann::json::array();
  for (const auto& c : r.inequalities) ineq.push_back(to_json(c));
  j["inequalities"] = ineq;
  nlohmann::json rem;
  rem["verdict"] = to_string(r.remark_verdict);
  if (r.remark_admissible) {
    rem["admissible"] = to_json(*r.remark_admissible);
    rem["admissible_text"] = r.remark_admissible->describe(r.parameter);
  }
  std::vector<int> ks;
  for (const auto& w : r.remark_witness)
    if (w.k >= 0) ks.push_back(w.k);
  rem["witness_k"] = ks;
  nlohmann::json rineq = nlohmann::json::array();
  for (const auto& c : r.remark_inequalities) rineq.push_back(to_json(c));
  rem["inequalities"] = rineq;
  j["remark"] = rem;
  nlohmann::json vals = nlohmann::json::object();
  for (const auto& [k, v] : r.values) vals[k] = to_string(v);
  j["values"] = vals;
  j["notes"] = r.notes;
  return j;
}

inline nlohmann::json to_json(const RegimeReport& rep) {
  const auto& p = rep.params;
  nlohmann::json j;
  j["params"] = {{"label", p.label},
                 {"theta", to_string(p.theta)},
                 {"theta1", to_string(p.theta1)},
                 {"theta2", to_string(p.theta2)},
                 {"n", p.n},
                 {"form", p.form},
                 {"family", to_string(p.family)},
                 {"exact", p.exact}};
  nlohmann::json v = nlohmann::json::object();
  for (const auto& r : rep.results) v[to_string(r.id)] = to_json(r);
  j["verdicts"] = v;
  j["uniqueness"] = rep.uniqueness_set().describe("beta");
  return j;
}

namespace detail {

inline std::string existence_ab(const RegimeReport& rep) {
  const auto& r = rep.at(TheoremId::existence_a);
  if (r.verdict != Verdict::holds) return "-";
  return to_string(r.values.at("a")) + ", " + to_string(r.values.at("b"));
}

inline std::string existence_gp(const RegimeReport& rep) {
  const auto& r = rep.at(TheoremId::existence_a);
  if (r.verdict != Verdict::holds) return "-";
  const std::string g = to_string(r.values.at("gamma")) + (r.values.at("gamma_open") != 0 ? "+eps" : "");
  return g + ", " + to_string(r.values.at("p"));
}

inline std::string set_text(const TheoremResult& r) {
  if (r.verdict == Verdict::not_applicable) return "n/a";
  return r.admissible ? pretty(r.admissible->describe(r.parameter)) : to_string(r.verdict);
}

inline std::size_t display_width(const std::string& s) {
  std::size_t w = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++w;
  return w;
}

inline std::string pad(const std::string& s, std::size_t w) {
  return s + std::string(w > display_width(s) ? w - display_width(s) : 0, ' ');
}

}  // namespace detail

// Rows: existence (a,b) and (gamma,p), local existence, uniqueness and
// regularity ranges; one column per report.
inline std::string format_table(const std::vector<RegimeReport>& reps) {
  std::vector<std::vector<std::string>> rows = {
      {"Model"}, {"a, b"}, {"γ, p"}, {"Local"}, {"Uniqueness"}, {"Regularity"}};
  for (const auto& rep : reps) {
    rows[0].push_back(rep.params.label);
    rows[1].push_back(detail::existence_ab(rep));
    rows[2].push_back(pretty(detail::existence_gp(rep)));
    rows[3].push_back(detail::set_text(rep.at(TheoremId::existence_b_local)));
    rows[4].push_back(pretty(rep.uniqueness_set().describe("beta")));
    rows[5].push_back(detail::set_text(rep.at(TheoremId::regularity)));
  }
  std::vector<std::size_t> w(rows[0].size(), 0);
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) w[c] = std::max(w[c], detail::display_width(r[c]));
  std::string out;
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) out += (c ? " | " : "") + detail::pad(r[c], w[c]);
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
  }
  return out;
}

inline std::string format_report(const RegimeReport& rep, bool verbose = false) {
  const auto& p = rep.params;
  std::ostringstream os;
  os << p.label << ": θ = " << to_string(p.theta) << ", θ1 = " << to_string(p.theta1)
     << ", θ2 = " << to_string(p.theta2) << ", n = " << p.n << ", form " << p.form << " ("
     << to_string(p.family) << ")\n";
  os << "existence: (a, b) = (" << detail::existence_ab(rep) << "), (γ, p) = ("
     << pretty(detail::existence_gp(rep)) << ")\n";
  os << "local existence: " << detail::set_text(rep.at(TheoremId::existence_b_local)) << "\n";
  os << "uniqueness: " << pretty(rep.uniqueness_set().describe("beta")) << "\n";
  os << "regularity: " << detail::set_text(rep.at(TheoremId::regularity)) << "\n";
  for (const auto& r : rep.results) {
    os << "  " << detail::pad(to_string(r.id), 28) << detail::pad(to_string(r.verdict), 15);
    if (r.admissible) os << pretty(r.admissible->describe(r.parameter));
    const auto ks = r.witness_k();
    if (!ks.empty()) {
      os << "  k =";
      for (int k : ks) os << ' ' << k;
    }
    os << "  [remark: " << to_string(r.remark_verdict);
    if (r.remark_admissible) os << ", " << pretty(r.remark_admissible->describe(r.parameter));
    os << "]";
    if (r.boundary) os << "  (boundary)";
    os << "\n";
    for (const auto& [k, v] : r.values)
      if (k != "gamma_open") os << "      " << k << " = " << to_string(v) << "\n";
    for (const auto& n : r.notes) os << "      note: " << n << "\n";
    if (verbose) {
      for (const auto& w : r.witness) os << "      route " << w.describe() << "\n";
      for (const auto& c : r.inequalities)
        os << "      " << (c.satisfied ? "ok  " : "FAIL") << " " << c.label << "  slack " << c.slack << "\n";
      for (const auto& c : r.remark_inequalities)
        os << "      remark " << (c.satisfied ? "ok  " : "FAIL") << " " << c.label << "  slack "
           << c.slack << "\n";
    }
  }
  return os.str();
}

}  // namespace rnsm
