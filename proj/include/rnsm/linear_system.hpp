#pragma once

// Exact linear feasibility over the rationals: systems of strict and
// non-strict inequalities, Fourier-Motzkin projection, and unions of
// intervals on one variable.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace rnsm {

// Fixed-width and overflow-checked: arithmetic that would not fit throws
// std::overflow_error instead of wrapping.
using Rational = boost::multiprecision::number<
    boost::multiprecision::rational_adaptor<boost::multiprecision::cpp_int_backend<
        128, 128, boost::multiprecision::signed_magnitude, boost::multiprecision::checked, void>>,
    boost::multiprecision::et_off>;

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

inline std::string to_string(const Rational& q) {
  std::ostringstream os;
  os << numerator(q);
  if (denominator(q) != 1) os << '/' << denominator(q);
  return os.str();
}

// Best rational approximation with denominator <= max_den. `exact` is set
// when the result converts back to exactly x.
inline Rational to_rational(double x, bool* exact = nullptr, long long max_den = 1000000) {
  if (!std::isfinite(x)) throw std::invalid_argument("non-finite parameter");
  long long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double r = x;
  for (int it = 0; it < 64; ++it) {
    const double a = std::floor(r);
    if (std::abs(a) > 9e15) break;
    const long long ai = static_cast<long long>(a);
    const long long k2 = ai * k1 + k0;
    if (k2 > max_den) break;
    const long long h2 = ai * h1 + h0;
    h0 = h1; h1 = h2; k0 = k1; k1 = k2;
    if (static_cast<double>(h1) / static_cast<double>(k1) == x) break;
    const double frac = r - a;
    if (frac == 0) break;
    r = 1 / frac;
  }
  Rational q(h1, k1);
  if (exact) *exact = (to_double(q) == x);
  return q;
}

// sum_i coef[i] x_i + constant
struct LinearExpr {
  std::map<int, Rational> coef;
  Rational constant;

  LinearExpr() = default;
  LinearExpr(Rational c) : constant(std::move(c)) {}  // NOLINT
  LinearExpr(int c) : constant(c) {}                   // NOLINT

  static LinearExpr variable(int i) {
    LinearExpr e;
    e.coef[i] = 1;
    return e;
  }
  Rational coefficient(int i) const {
    auto it = coef.find(i);
    return it == coef.end() ? Rational(0) : it->second;
  }
  Rational eval(const std::vector<Rational>& x) const {
    Rational s = constant;
    for (const auto& [i, a] : coef) s += a * x.at(i);
    return s;
  }
  LinearExpr& operator+=(const LinearExpr& o) {
    for (const auto& [i, a] : o.coef) coef[i] += a;
    constant += o.constant;
    return *this;
  }
  LinearExpr& operator*=(const Rational& s) {
    for (auto& [i, a] : coef) a *= s;
    constant *= s;
    return *this;
  }
};

inline LinearExpr operator+(LinearExpr a, const LinearExpr& b) { return a += b; }
inline LinearExpr operator-(LinearExpr a, LinearExpr b) { return a += (b *= Rational(-1)); }
inline LinearExpr operator-(LinearExpr a) { return a *= Rational(-1); }
inline LinearExpr operator*(const Rational& s, LinearExpr a) { return a *= s; }

enum class Relation { ge, gt, eq };

// expr REL 0, with a human-readable label.
struct Constraint {
  LinearExpr expr;
  Relation rel = Relation::ge;
  std::string label;

  bool satisfied(const std::vector<Rational>& x) const {
    const Rational v = expr.eval(x);
    return rel == Relation::gt ? v > 0 : rel == Relation::ge ? v >= 0 : v == 0;
  }
};

inline Constraint ge(const LinearExpr& lhs, const LinearExpr& rhs, std::string label = {}) {
  return {lhs - rhs, Relation::ge, std::move(label)};
}
inline Constraint gt(const LinearExpr& lhs, const LinearExpr& rhs, std::string label = {}) {
  return {lhs - rhs, Relation::gt, std::move(label)};
}
inline Constraint le(const LinearExpr& lhs, const LinearExpr& rhs, std::string label = {}) {
  return ge(rhs, lhs, std::move(label));
}
inline Constraint lt(const LinearExpr& lhs, const LinearExpr& rhs, std::string label = {}) {
  return gt(rhs, lhs, std::move(label));
}
inline Constraint eq(const LinearExpr& lhs, const LinearExpr& rhs, std::string label = {}) {
  return {lhs - rhs, Relation::eq, std::move(label)};
}

struct Interval {
  std::optional<Rational> lo, hi;  // nullopt = unbounded
  bool lo_closed = false, hi_closed = false;

  bool empty() const {
    if (!lo || !hi) return false;
    if (*lo < *hi) return false;
    return !(*lo == *hi && lo_closed && hi_closed);
  }
  bool contains(const Rational& x) const {
    if (lo && (x < *lo || (x == *lo && !lo_closed))) return false;
    if (hi && (x > *hi || (x == *hi && !hi_closed))) return false;
    return true;
  }
  bool is_point() const { return lo && hi && *lo == *hi; }

  // A representative point: a closed endpoint or point, the midpoint, or a
  // unit step inside a half-line.
  Rational pick() const {
    if (is_point()) return *lo;
    if (lo && hi) return (*lo + *hi) / 2;
    if (lo) return *lo + (lo_closed ? 0 : 1);
    if (hi) return *hi - (hi_closed ? 0 : 1);
    return 0;
  }
  bool operator==(const Interval&) const = default;
};

class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(Interval i) { add(std::move(i)); }

  static IntervalSet everything() { return IntervalSet(Interval{}); }

  void add(Interval i) {
    if (i.empty()) return;
    parts_.push_back(std::move(i));
    normalize();
  }
  void add(const IntervalSet& s) {
    for (const auto& i : s.parts_) add(i);
  }

  bool empty() const { return parts_.empty(); }
  const std::vector<Interval>& parts() const { return parts_; }
  bool contains(const Rational& x) const {
    return std::any_of(parts_.begin(), parts_.end(), [&](const Interval& i) { return i.contains(x); });
  }
  bool operator==(const IntervalSet&) const = default;

  // "x > 3/2", "x >= 0", "-1 < x <= 2", "x > -1/2 or x = -1", "empty", "all".
  std::string describe(const std::string& x) const {
    if (parts_.empty()) return "empty";
    std::string out;
    // Largest pieces first, isolated points after, mirroring the usual phrasing.
    std::vector<const Interval*> order;
    for (const auto& p : parts_) if (!p.is_point()) order.push_back(&p);
    for (const auto& p : parts_) if (p.is_point()) order.push_back(&p);
    for (const Interval* p : order) {
      if (!out.empty()) out += " or ";
      out += describe_one(*p, x);
    }
    return out;
  }

 private:
  static std::string describe_one(const Interval& i, const std::string& x) {
    if (i.is_point()) return x + " = " + to_string(*i.lo);
    if (!i.lo && !i.hi) return "all " + x;
    if (!i.hi) return x + (i.lo_closed ? " >= " : " > ") + to_string(*i.lo);
    if (!i.lo) return x + (i.hi_closed ? " <= " : " < ") + to_string(*i.hi);
    return to_string(*i.lo) + (i.lo_closed ? " <= " : " < ") + x + (i.hi_closed ? " <= " : " < ") +
           to_string(*i.hi);
  }

  // lower endpoint ordering: -inf first, then by value, closed before open.
  static bool starts_before(const Interval& a, const Interval& b) {
    if (!a.lo) return b.lo.has_value();
    if (!b.lo) return false;
    if (*a.lo != *b.lo) return *a.lo < *b.lo;
    return a.lo_closed && !b.lo_closed;
  }

  // Whether b starts inside or right at the end of a (so the union is one piece).
  static bool joins(const Interval& a, const Interval& b) {
    if (!a.hi || !b.lo) return true;
    if (*b.lo < *a.hi) return true;
    if (*b.lo > *a.hi) return false;
    return a.hi_closed || b.lo_closed;
  }

  void normalize() {
    std::sort(parts_.begin(), parts_.end(), starts_before);
    std::vector<Interval> merged;
    for (auto& p : parts_) {
      if (!merged.empty() && joins(merged.back(), p)) {
        Interval& m = merged.back();
        if (!p.hi || (m.hi && *p.hi > *m.hi)) {
          m.hi = p.hi;
          m.hi_closed = p.hi_closed;
        } else if (m.hi && p.hi && *p.hi == *m.hi) {
          m.hi_closed = m.hi_closed || p.hi_closed;
        }
        continue;
      }
      merged.push_back(p);
    }
    parts_ = std::move(merged);
  }

  std::vector<Interval> parts_;
};

namespace fm {

// a.x + c (> or >=) 0 on a fixed number of variables.
struct Row {
  std::vector<Rational> a;
  Rational c;
  bool strict = false;
};

using System = std::vector<Row>;

inline System lower(const std::vector<Constraint>& cons, int nvars) {
  System out;
  for (const auto& k : cons) {
    Row r;
    r.a.assign(nvars, Rational(0));
    for (const auto& [i, v] : k.expr.coef) {
      if (i < 0 || i >= nvars) throw std::out_of_range("constraint variable out of range");
      r.a[i] = v;
    }
    r.c = k.expr.constant;
    r.strict = k.rel == Relation::gt;
    out.push_back(r);
    if (k.rel == Relation::eq) {
      for (auto& v : r.a) v = -v;
      r.c = -r.c;
      out.push_back(r);
    }
  }
  return out;
}

// Scales so the first nonzero coefficient is +-1, drops trivially true rows,
// keeps the tightest row per direction. Returns false on a false constant row.
inline bool tidy(System& s) {
  std::map<std::vector<Rational>, Row> best;
  for (auto& r : s) {
    auto nz = std::find_if(r.a.begin(), r.a.end(), [](const Rational& v) { return v != 0; });
    if (nz == r.a.end()) {
      if (r.strict ? !(r.c > 0) : !(r.c >= 0)) return false;
      continue;
    }
    const Rational scale = abs(*nz);
    for (auto& v : r.a) v /= scale;
    r.c /= scale;
    auto it = best.find(r.a);
    if (it == best.end()) {
      best.emplace(r.a, r);
    } else if (r.c < it->second.c || (r.c == it->second.c && r.strict)) {
      it->second = r;
    }
  }
  s.clear();
  for (auto& [k, r] : best) s.push_back(std::move(r));
  return true;
}

// Eliminates variable j; returns nullopt if the system is infeasible.
inline std::optional<System> eliminate(const System& s, int j) {
  System pos, neg, out;
  for (const auto& r : s) {
    if (r.a[j] > 0) pos.push_back(r);
    else if (r.a[j] < 0) neg.push_back(r);
    else out.push_back(r);
  }
  for (const auto& p : pos)
    for (const auto& q : neg) {
      const Rational wp = -q.a[j], wq = p.a[j];
      Row r;
      r.a.resize(p.a.size());
      for (std::size_t i = 0; i < p.a.size(); ++i) r.a[i] = wp * p.a[i] + wq * q.a[i];
      r.a[j] = 0;
      r.c = wp * p.c + wq * q.c;
      r.strict = p.strict || q.strict;
      out.push_back(std::move(r));
    }
  if (!tidy(out)) return std::nullopt;
  return out;
}

// Eliminates every variable except `keep` (-1 for none), cheapest first.
inline std::optional<System> eliminate_all_but(System s, int nvars, int keep) {
  std::vector<int> left;
  for (int v = 0; v < nvars; ++v)
    if (v != keep) left.push_back(v);
  while (!left.empty()) {
    auto cost = [&](int v) {
      long pos = 0, neg = 0;
      for (const auto& r : s) {
        if (r.a[v] > 0) ++pos;
        else if (r.a[v] < 0) ++neg;
      }
      return pos * neg - pos - neg;
    };
    auto best = std::min_element(left.begin(), left.end(),
                                 [&](int a, int b) { return cost(a) < cost(b); });
    auto e = eliminate(s, *best);
    if (!e) return std::nullopt;
    s = std::move(*e);
    left.erase(best);
  }
  return s;
}

// Bounds on variable j from rows in which every other coefficient is zero.
inline Interval bounds_on(const System& s, int j) {
  Interval iv;
  for (const auto& r : s) {
    if (r.a[j] == 0) continue;
    const Rational x = -r.c / r.a[j];
    if (r.a[j] > 0) {
      if (!iv.lo || x > *iv.lo || (x == *iv.lo && r.strict)) {
        const bool tighter = !iv.lo || x > *iv.lo;
        iv.lo = x;
        iv.lo_closed = tighter ? !r.strict : iv.lo_closed && !r.strict;
      }
    } else {
      if (!iv.hi || x < *iv.hi || (x == *iv.hi && r.strict)) {
        const bool tighter = !iv.hi || x < *iv.hi;
        iv.hi = x;
        iv.hi_closed = tighter ? !r.strict : iv.hi_closed && !r.strict;
      }
    }
  }
  return iv;
}

inline System substitute(const System& s, int j, const Rational& v) {
  System out = s;
  for (auto& r : out) {
    r.c += r.a[j] * v;
    r.a[j] = 0;
  }
  return out;
}

}  // namespace fm

// A conjunction of constraints on `nvars` variables.
class LinearSystem {
 public:
  explicit LinearSystem(int nvars) : n_(nvars) {}
  LinearSystem(int nvars, std::vector<Constraint> cons) : n_(nvars), cons_(std::move(cons)) {}

  int size() const { return n_; }
  const std::vector<Constraint>& constraints() const { return cons_; }
  void add(Constraint c) { cons_.push_back(std::move(c)); }
  void add(const std::vector<Constraint>& cs) { cons_.insert(cons_.end(), cs.begin(), cs.end()); }

  bool feasible() const {
    auto s = fm::lower(cons_, n_);
    return fm::tidy(s) && fm::eliminate_all_but(std::move(s), n_, -1).has_value();
  }

  // Projection onto variable j (all others existentially quantified).
  IntervalSet project(int j) const {
    auto s = fm::lower(cons_, n_);
    if (!fm::tidy(s)) return {};
    auto e = fm::eliminate_all_but(std::move(s), n_, j);
    if (!e) return {};
    return IntervalSet(fm::bounds_on(*e, j));
  }

  // A point satisfying every constraint, by back substitution.
  std::optional<std::vector<Rational>> solve_point() const {
    std::vector<fm::System> stage(n_ + 1);
    stage[n_] = fm::lower(cons_, n_);
    if (!fm::tidy(stage[n_])) return std::nullopt;
    for (int v = n_ - 1; v >= 0; --v) {
      auto e = fm::eliminate(stage[v + 1], v);
      if (!e) return std::nullopt;
      stage[v] = std::move(*e);
    }
    std::vector<Rational> x(n_, Rational(0));
    for (int v = 0; v < n_; ++v) {
      fm::System s = stage[v + 1];
      for (int u = 0; u < v; ++u) s = fm::substitute(s, u, x[u]);
      const Interval iv = fm::bounds_on(s, v);
      if (iv.empty()) return std::nullopt;
      x[v] = iv.pick();
    }
    for (const auto& c : cons_)
      if (!c.satisfied(x)) return std::nullopt;
    return x;
  }

 private:
  int n_;
  std::vector<Constraint> cons_;
};

}  // namespace rnsm
