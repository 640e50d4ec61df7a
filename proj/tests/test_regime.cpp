#include <gtest/gtest.h>

#include <chrono>
#include <map>

#include "rnsm/regime.hpp"

using namespace rnsm;

namespace {

Rational q(long a, long b = 1) { return Rational(a, b); }

Interval iv(std::optional<Rational> lo, bool lo_closed, std::optional<Rational> hi, bool hi_closed) {
  Interval i;
  i.lo = lo;
  i.hi = hi;
  i.lo_closed = lo_closed;
  i.hi_closed = hi_closed;
  return i;
}

IntervalSet set_of(std::initializer_list<Interval> parts) {
  IntervalSet s;
  for (const auto& p : parts) s.add(p);
  return s;
}

const RegimeReport& table_report(const std::string& name) {
  static std::map<std::string, RegimeReport> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, full_report(preset(name, {.n_dim = 3}), 3)).first;
  return it->second;
}

// A small grid of parameter points over all three families.
const std::vector<RegimeReport>& grid_reports() {
  static std::vector<RegimeReport> reps = [] {
    std::vector<RegimeReport> out;
    for (Form f : {Form::B1, Form::B2, Form::B4})
      for (double t : {0.0, 0.5, 1.0, 2.0})
        for (double t1 : {0.0, 1.0})
          for (double t2 : {-0.5, 0.0, 1.0}) out.push_back(full_report(regime_params(t, t1, t2, f, 3)));
    return out;
  }();
  return reps;
}

}  // namespace

TEST(Interval, DescribeAndMerge) {
  IntervalSet s;
  s.add(iv(q(-1, 2), false, {}, false));
  s.add(iv(q(-1), true, q(-1), true));
  EXPECT_EQ(s.describe("beta"), "beta > -1/2 or beta = -1");
  s.add(iv(q(-1), true, q(0), false));
  EXPECT_EQ(s.describe("beta"), "beta >= -1");
  EXPECT_EQ(IntervalSet().describe("x"), "empty");
  IntervalSet t;
  t.add(iv(q(0), false, q(1), false));
  t.add(iv(q(1), false, q(2), true));
  EXPECT_EQ(t.parts().size(), 2u);  // the point 1 is missing
  t.add(iv(q(1), true, q(1), true));
  EXPECT_EQ(t.describe("x"), "0 < x <= 2");
}

TEST(LinearSystem, StrictnessSurvivesProjection) {
  const auto x = LinearExpr::variable(0), y = LinearExpr::variable(1);
  LinearSystem s(2, {gt(x + y, 3), le(y, 1), ge(x, 0)});
  EXPECT_EQ(s.project(0), set_of({iv(q(2), false, {}, false)}));
  s.add(le(x, 2));
  EXPECT_FALSE(s.feasible());
}

TEST(LinearSystem, EqualityAndWitnessPoint) {
  const auto x = LinearExpr::variable(0), y = LinearExpr::variable(1), z = LinearExpr::variable(2);
  LinearSystem s(3, {eq(x + y, q(5, 2)), gt(x, 1), lt(y, 1), ge(z, x - y)});
  const auto pt = s.solve_point();
  ASSERT_TRUE(pt);
  for (const auto& c : s.constraints()) EXPECT_TRUE(c.satisfied(*pt)) << c.label;
  EXPECT_EQ(s.project(0), set_of({iv(q(3, 2), false, {}, false)}));
}

TEST(LinearSystem, RationalConversion) {
  bool exact = false;
  EXPECT_EQ(to_rational(0.5, &exact), q(1, 2));
  EXPECT_TRUE(exact);
  EXPECT_EQ(to_rational(-1.5), q(-3, 2));
  // 1/3 round-trips to the same double, so it counts as exact.
  EXPECT_EQ(to_rational(1.0 / 3.0, &exact), q(1, 3));
  EXPECT_TRUE(exact);
  to_rational(1.0 + 1e-13, &exact);
  EXPECT_FALSE(exact);
}

TEST(Sobolev, Examples) {
  EXPECT_TRUE(sobolev_mult_admissible(1.0, 1.0, 0.0, 3).admissible);
  const auto f = sobolev_mult_admissible(1.0, 1.0, 1.0, 3);
  EXPECT_FALSE(f.admissible);
  EXPECT_FALSE(f.checks[3].satisfied);
  EXPECT_DOUBLE_EQ(f.checks[3].slack, -0.5);
  EXPECT_TRUE(sobolev_mult_admissible(0.5, 1.0, 0.0, 2).admissible);
}

TEST(Sobolev, StrictnessInterchangeOnlyForNaturalOrders) {
  // s1 + s2 - s = n/2 exactly: admissible only through the interchange.
  const auto a = sobolev_mult_admissible(0.75, 0.75, 0.0, 3);
  EXPECT_TRUE(a.admissible);
  EXPECT_TRUE(a.interchanged);
  EXPECT_FALSE(sobolev_mult_admissible(1.0, 1.0, 0.5, 3).admissible);
  // The interchanged variant needs s_i > s.
  EXPECT_FALSE(sobolev_mult_admissible(0.0, 1.5, 0.0, 3).admissible);
  EXPECT_FALSE(sobolev_mult_admissible(-1.0, 0.5, -2.0, 3).admissible);
}

TEST(Boundedness, Examples) {
  const auto a = bform_bounded(FormFamily::b1_b3, 1.0, 1.0, 1.0, 3);
  ASSERT_TRUE(a.bounded);
  std::vector<int> strict_ks;
  for (const auto& r : a.routes)
    if (r.relaxation == Relaxation::none) strict_ks.push_back(r.k);
  EXPECT_EQ(strict_ks, (std::vector<int>{0, 1}));

  const auto b = bform_bounded(FormFamily::b2, 2.0, 0.0, 0.0, 2);
  ASSERT_TRUE(b.bounded);
  bool nonstrict = false;
  for (const auto& r : b.routes) nonstrict = nonstrict || r.relaxation == Relaxation::nonstrict_orders;
  EXPECT_TRUE(nonstrict);

  EXPECT_FALSE(bform_bounded(FormFamily::b1_b3, 0.0, 0.0, 1.0, 3).bounded);
}

TEST(Boundedness, NonpositiveIntegerRelaxation) {
  // Sum exactly (n+2)/2 with s1 = 0 and the k = 1 pairs.
  const auto b = bform_bounded(FormFamily::b4_b5, q(0), q(1), q(3, 2), 3);
  ASSERT_TRUE(b.bounded);
  bool integer = false;
  for (const auto& r : b.routes) integer = integer || (r.relaxation == Relaxation::nonpositive_integer && r.integer_slot == 0);
  EXPECT_TRUE(integer);
  // Same sum, no integer order, nonstrict floors not met.
  EXPECT_FALSE(bform_bounded(FormFamily::b4_b5, q(1, 2), q(1, 2), q(3, 2), 3).bounded);
}

TEST(Presets, ParameterRows) {
  struct Row { const char* name; double t, t1, t2; Form form; };
  for (const Row& r : {Row{"NSE", 1, 0, 0, Form::B1}, Row{"Leray-alpha", 1, 1, 0, Form::B1},
                       Row{"ML-alpha", 1, 0, 1, Form::B1}, Row{"SBM", 1, 1, 1, Form::B1},
                       Row{"NSV", 0, 1, 1, Form::B1}, Row{"NS-alpha", 1, 0, 1, Form::B2}}) {
    const auto p = preset(r.name);
    EXPECT_EQ(p.theta, r.t) << r.name;
    EXPECT_EQ(p.theta1, r.t1) << r.name;
    EXPECT_EQ(p.theta2, r.t2) << r.name;
    EXPECT_EQ(p.family(), r.form) << r.name;
  }
}

TEST(GoldenTables, ExistenceRow) {
  struct Row { const char* name; Rational a, b, gamma, p; bool open; };
  const std::vector<Row> rows = {
      {"NSE", q(0), q(1), q(1), q(4, 3), false},       {"Leray-alpha", q(0), q(1), q(1), q(2), false},
      {"ML-alpha", q(-1), q(0), q(2), q(2), false},    {"SBM", q(-1), q(0), q(2), q(2), false},
      {"NSV", q(-1), q(-1), q(1), q(2), true},         {"NS-alpha", q(-1), q(0), q(2), q(2), false},
      {"NS-alpha-like", q(-1), q(0), q(2), q(2), false}};
  for (const auto& r : rows) {
    const auto& e = table_report(r.name).at(TheoremId::existence_a);
    ASSERT_EQ(e.verdict, Verdict::holds) << r.name;
    EXPECT_EQ(e.values.at("a"), r.a) << r.name;
    EXPECT_EQ(e.values.at("b"), r.b) << r.name;
    EXPECT_EQ(e.values.at("gamma"), r.gamma) << r.name;
    EXPECT_EQ(e.values.at("p"), r.p) << r.name;
    EXPECT_EQ(e.values.at("gamma_open") != 0, r.open) << r.name;
  }
}

TEST(GoldenTables, LocalExistenceRow) {
  const std::map<std::string, std::string> expect = {
      {"NSE", "beta > 3/2"}, {"Leray-alpha", "beta >= 0"}, {"ML-alpha", "beta > -1/2"},
      {"SBM", "beta >= -1"}, {"NSV", "beta >= -1"},        {"NS-alpha", "beta > -1/2"},
      {"NS-alpha-like", "beta > -1/2"}};
  for (const auto& [name, text] : expect) {
    const auto& r = table_report(name).at(TheoremId::existence_b_local);
    ASSERT_TRUE(r.admissible);
    EXPECT_EQ(r.admissible->describe("beta"), text) << name;
  }
}

TEST(GoldenTables, UniquenessRow) {
  const std::map<std::string, std::string> expect = {
      {"NSE", "beta > 3/2"},
      {"Leray-alpha", "beta >= 0"},
      {"ML-alpha", "beta > -1/2 or beta = -1"},
      {"SBM", "beta >= -1"},
      {"NSV", "beta >= -1"},
      {"NS-alpha", "beta > -1/2 or beta = -1"},
      {"NS-alpha-like", "beta > -1/2 or beta = -1"}};
  for (const auto& [name, text] : expect)
    EXPECT_EQ(table_report(name).uniqueness_set().describe("beta"), text) << name;
}

TEST(GoldenTables, RegularityRow) {
  // Upper bounds as tabulated; the lower bound is the open beta > -theta2.
  struct Row { const char* name; std::optional<Rational> hi; Rational lo; };
  const std::vector<Row> rows = {{"NSE", std::nullopt, q(0)},     {"Leray-alpha", q(1), q(0)},
                                 {"ML-alpha", q(1, 2), q(-1, 2)}, {"SBM", q(2), q(-1)},
                                 {"NSV", q(-1, 2), q(-1)},        {"NS-alpha", q(0), q(-1, 2)},
                                 {"NS-alpha-like", q(0), q(-1, 2)}};
  for (const auto& r : rows) {
    const auto& res = table_report(r.name).at(TheoremId::regularity);
    ASSERT_TRUE(res.admissible);
    if (!r.hi) {
      EXPECT_TRUE(res.admissible->empty()) << r.name;
      EXPECT_EQ(res.verdict, Verdict::fails);
      continue;
    }
    EXPECT_EQ(*res.admissible, set_of({iv(r.lo, false, r.hi, true)})) << r.name;
  }
}

TEST(GoldenTables, FullReportUnderOneSecond) {
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& name : table_presets()) full_report(preset(name, {.n_dim = 3}), 3);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 1.0);
}

TEST(CheckTheorem, SpecExamples) {
  const auto u = check_theorem(TheoremId::uniqueness_b, preset("NSE"), 3);
  EXPECT_EQ(u.admissible->describe("beta"), "beta > 3/2");
  const auto r = check_theorem(TheoremId::regularity, preset("SBM"), 3);
  EXPECT_EQ(*r.admissible->parts().back().hi, q(2));
  EXPECT_TRUE(r.admissible->parts().back().hi_closed);
  auto like = [](double t2) {
    return check_theorem(TheoremId::attractor_corollary, preset("NS-alpha-like", {.theta = 1, .theta2 = t2}), 3)
        .verdict;
  };
  EXPECT_EQ(like(0), Verdict::fails);
  EXPECT_EQ(like(1), Verdict::holds);
}

TEST(CheckTheorem, QueriedBeta) {
  const auto& m = preset("Leray-alpha");
  EXPECT_EQ(check_theorem(TheoremId::regularity, m, 3, 1.0).verdict, Verdict::holds);
  EXPECT_EQ(check_theorem(TheoremId::regularity, m, 3, 1.25).verdict, Verdict::fails);
  EXPECT_EQ(check_theorem(TheoremId::regularity, m, 3, 0.0).verdict, Verdict::fails);
  EXPECT_EQ(check_theorem(TheoremId::uniqueness_b, preset("NSE"), 3, 1.5).verdict, Verdict::fails);
  EXPECT_FALSE(check_theorem(TheoremId::uniqueness_b, preset("NSE"), 3, 1.5).boundary);
}

TEST(CheckTheorem, InexactInputsFlagBoundary) {
  // theta = 1 + 1e-13 is not a short rational; a beta at the computed edge is flagged.
  auto m = preset("NS-alpha-like", {.theta = 1.0 + 1e-13, .theta2 = 1.0});
  const auto r = check_theorem(TheoremId::regularity, m, 3, 0.0);
  EXPECT_TRUE(r.boundary);
  EXPECT_FALSE(check_theorem(TheoremId::regularity, preset("NS-alpha"), 3, 0.0).boundary);
}

TEST(CheckTheorem, UnknownId) { EXPECT_THROW(theorem_from("existence-c"), std::invalid_argument); }

TEST(CheckTheorem, TrivialParametersFailEverything) {
  const auto rep = full_report(regime_params(0, 0, 0, Form::B1, 3));
  for (const auto& r : rep.results) EXPECT_NE(r.verdict, Verdict::holds) << to_string(r.id);
  EXPECT_EQ(rep.at(TheoremId::determining_dissipative).verdict, Verdict::not_applicable);
}

TEST(CheckTheorem, DeterminingModeExponents) {
  EXPECT_EQ(table_report("Leray-alpha").at(TheoremId::determining_dissipative).values.at("mode_exponent"),
            q(3));
  const auto& nsv = table_report("NSV").at(TheoremId::determining_nondissipative);
  EXPECT_EQ(nsv.admissible->describe("alpha"), "-3/2 <= alpha <= -1");
  EXPECT_EQ(nsv.values.at("mode_exponent"), q(6));
  EXPECT_EQ(table_report("NSE").at(TheoremId::determining_nondissipative).verdict, Verdict::not_applicable);
}

TEST(NsAlphaLike, LocalExistenceMatchesStatedFormula) {
  // beta > 5/2 - theta - 2 theta2 and beta >= 1/2 - theta2, when theta >= 1.
  for (double t : {0.75, 1.0, 1.5, 2.0, 3.0})
    for (double t2 : {-0.5, 0.0, 0.5, 1.0, 2.0}) {
      const auto r = check_theorem(TheoremId::existence_b_local, preset("NS-alpha-like", {.theta = t, .theta2 = t2}), 3);
      const Rational T = to_rational(t), T2 = to_rational(t2);
      IntervalSet expect;
      if (t >= 1 && t + 2 * t2 >= 0) {
        const Rational a = q(5, 2) - T - 2 * T2, b = q(1, 2) - T2;
        expect.add(b > a ? iv(b, true, {}, false) : iv(a, false, {}, false));
      }
      EXPECT_EQ(*r.remark_admissible, expect) << t << " " << t2;
      for (const auto& part : expect.parts()) EXPECT_TRUE(r.admissible->contains(part.pick())) << t << " " << t2;
    }
}

TEST(NsAlphaLike, RegularityUpperBoundMatchesStatedFormula) {
  // beta <= 2 theta - theta2 - 1 and beta < 3 theta - 5/2.
  for (double t : {1.0, 1.5, 2.0, 3.0})
    for (double t2 : {-0.5, 0.5, 1.0, 2.0}) {
      if (4 * t + 2 * t2 <= 5) continue;
      const auto r = check_theorem(TheoremId::regularity, preset("NS-alpha-like", {.theta = t, .theta2 = t2}), 3);
      ASSERT_FALSE(r.remark_admissible->empty()) << t << " " << t2;
      const Rational T = to_rational(t), T2 = to_rational(t2);
      const Rational a = 2 * T - T2 - 1, b = 3 * T - q(5, 2);
      const auto& top = r.remark_admissible->parts().back();
      EXPECT_EQ(*top.hi, std::min(a, b)) << t << " " << t2;
      EXPECT_EQ(top.hi_closed, a < b) << t << " " << t2;
    }
}

TEST(NsAlphaLike, CorollaryHoldsUnderStatedCondition) {
  for (double t : {1.0, 1.5, 2.5})
    for (double t2 : {0.75, 1.0, 2.0})
      EXPECT_EQ(check_theorem(TheoremId::attractor_corollary, preset("NS-alpha-like", {.theta = t, .theta2 = t2}), 3)
                    .verdict,
                Verdict::holds)
          << t << " " << t2;
}

TEST(Properties, MonotoneInTheta) {
  for (Form f : {Form::B1, Form::B2, Form::B4})
    for (double t1 : {0.0, 0.5, 1.0})
      for (double t2 : {-0.5, 0.0, 0.5, 1.0}) {
        std::vector<TheoremResult> prev;
        for (double t : {0.25, 0.5, 1.0, 1.5, 2.0}) {
          const auto p = regime_params(t, t1, t2, f, 3);
          std::vector<TheoremResult> cur;
          for (auto id : {TheoremId::existence_a, TheoremId::existence_b_local, TheoremId::uniqueness_a,
                          TheoremId::uniqueness_b, TheoremId::regularity, TheoremId::attractor_iii,
                          TheoremId::attractor_corollary, TheoremId::determining_dissipative})
            cur.push_back(check_theorem(id, p, id == TheoremId::existence_b_local || id == TheoremId::uniqueness_b
                                                   ? std::optional<double>(1.0)
                                                   : std::nullopt));
          for (std::size_t i = 0; i < prev.size(); ++i) {
            if (prev[i].verdict == Verdict::holds) {
              EXPECT_EQ(cur[i].verdict, Verdict::holds) << to_string(cur[i].id) << " t=" << t << " t1=" << t1
                                                        << " t2=" << t2 << " " << to_string(f);
            }
            // Every remark inequality has a nonnegative theta coefficient.
            std::map<std::string, double> before;
            for (const auto& c : prev[i].remark_inequalities) before[c.label] = c.slack;
            for (const auto& c : cur[i].remark_inequalities) {
              auto it = before.find(c.label);
              if (it != before.end()) {
                EXPECT_GE(c.slack, it->second - 1e-12) << c.label;
              }
            }
          }
          prev = std::move(cur);
        }
      }
}

TEST(Properties, WitnessesAreSound) {
  for (const auto& rep : grid_reports())
    for (const auto& r : rep.results) {
      if (r.verdict != Verdict::holds) continue;
      ASSERT_EQ(r.witness.size(), r.witness_orders.size()) << to_string(r.id);
      ASSERT_FALSE(r.witness.empty()) << to_string(r.id);
      for (std::size_t i = 0; i < r.witness.size(); ++i) {
        const auto& o = r.witness_orders[i];
        EXPECT_TRUE(route_holds(rep.params.family, r.witness[i], o[0], o[1], o[2], rep.params.n))
            << to_string(r.id) << " " << r.witness[i].describe();
      }
      for (const auto& c : r.inequalities) EXPECT_TRUE(c.satisfied) << to_string(r.id) << " " << c.label;
      if (r.remark_verdict == Verdict::holds) {
        for (const auto& c : r.remark_inequalities) EXPECT_TRUE(c.satisfied) << to_string(r.id) << " " << c.label;
      }
    }
}

TEST(Properties, RemarkConditionsImplyHypotheses) {
  for (const auto& rep : grid_reports())
    for (const auto& r : rep.results) {
      if (r.remark_verdict != Verdict::holds) continue;
      EXPECT_EQ(r.verdict, Verdict::holds) << to_string(r.id) << " " << rep.params.label << " theta="
                                           << to_string(rep.params.theta) << " theta1=" << to_string(rep.params.theta1)
                                           << " theta2=" << to_string(rep.params.theta2) << " " << rep.params.form;
      if (r.remark_admissible && r.admissible)
        for (const auto& part : r.remark_admissible->parts()) {
          EXPECT_TRUE(r.admissible->contains(part.pick())) << to_string(r.id);
          if (part.lo && part.lo_closed) {
            EXPECT_TRUE(r.admissible->contains(*part.lo)) << to_string(r.id);
          }
          if (part.hi && part.hi_closed) {
            EXPECT_TRUE(r.admissible->contains(*part.hi)) << to_string(r.id);
          }
        }
    }
}

TEST(Output, TableAndJson) {
  std::vector<RegimeReport> reps;
  for (const auto& name : table_presets()) reps.push_back(table_report(name));
  const auto table = format_table(reps);
  EXPECT_NE(table.find("β > -1/2 or β = -1"), std::string::npos);
  EXPECT_NE(table.find("1, 4/3"), std::string::npos);
  EXPECT_NE(table.find("1+eps, 2"), std::string::npos);
  EXPECT_NE(format_report(table_report("Leray-alpha")).find("uniqueness: β ≥ 0"), std::string::npos);
  const auto j = to_json(table_report("SBM"));
  EXPECT_EQ(j["verdicts"]["regularity"]["admissible_text"], "-1 < beta <= 2");
  EXPECT_EQ(j["params"]["theta2"], "1");
  EXPECT_EQ(j["verdicts"].size(), all_theorems().size());
  for (const auto& [id, v] : j["verdicts"].items()) EXPECT_TRUE(v.contains("inequalities")) << id;
}
