#include "doctest.h"

#include <random>

#include "canonfn/errors.hpp"
#include "canonfn/groups.hpp"

using namespace canonfn;

namespace {

GroupPresentation dlo() { return GroupPresentation::aut(builtin_limit("dlo")); }
Point q(std::int64_t n, std::int64_t d = 1) { return rational_point(Rational(n, d)); }
Point q2(std::int64_t a, std::int64_t b) { return rational_point({Rational(a), Rational(b)}); }

}  // namespace

TEST_CASE("orbit_label examples") {
  auto g = dlo();
  std::vector<Point> t{q(1), q(2)};
  CHECK(g.label_str(g.label(t)) == "1<2");

  auto st = GroupPresentation::stabilizer(g, {q(0)});
  std::vector<Point> m3{q(-3)};
  CHECK(st.label_str(st.label(m3)) == "1<2");
  std::vector<Point> ext{q(-3), q(0)};
  CHECK(st.label(m3) == g.label(ext));

  auto p2 = GroupPresentation::power(g, 2);
  std::vector<Point> pt{q2(1, 5), q2(2, 3)};
  CHECK(p2.label_str(p2.label(pt)) == "[1<2][2<1]");
}

TEST_CASE("same_orbit examples") {
  auto g = dlo();
  std::vector<Point> a{q(1), q(2)}, b{q(7), q(9)};
  CHECK(g.same_orbit(a, b));
  auto st = GroupPresentation::stabilizer(g, {q(0)});
  std::vector<Point> m1{q(-1)}, p1{q(1)};
  CHECK_FALSE(st.same_orbit(m1, p1));
  auto p2 = GroupPresentation::power(g, 2);
  std::vector<Point> s{q2(0, 0), q2(1, 1)}, t{q2(0, 5), q2(1, 9)};
  CHECK(p2.same_orbit(s, t));
}

TEST_CASE("count_orbits_g examples and the power law") {
  auto g = dlo();
  CHECK(GroupPresentation::stabilizer(g, {q(0)}).count_orbits(1) == 3);
  auto p2 = GroupPresentation::power(g, 2);
  CHECK(p2.count_orbits(1) == 1);
  CHECK(p2.count_orbits(2) == 9);
  for (int k = 1; k <= 3; ++k) {
    auto base = count_orbits(g.limit(), k);
    CHECK(p2.count_orbits(k) == base * base);
  }
  // Two constants 0 < 5: a new point has 5 positions relative to them.
  CHECK(GroupPresentation::stabilizer(g, {q(0), q(5)}).count_orbits(1) == 5);
}

TEST_CASE("group spec strings round-trip") {
  for (std::string s : {"aut(dlo)", "power(aut(dlo),2)", "stab(power(aut(dlo),2); (0,1),(3,5))", "stab(aut(dlo); 0)",
                        "aut(rado)", "stab(aut(rado); v1,v2)"}) {
    CHECK(parse_group(s).str() == s);
  }
  CHECK_THROWS_AS(parse_group("power(aut(dlo),0)"), UsageError);
  CHECK_THROWS_AS(parse_group("aut(nope)"), UsageError);
  CHECK_THROWS_AS(parse_group("stab(power(aut(dlo),2); 0)"), UsageError);
  CHECK_THROWS_AS(parse_group("aut(dlo"), UsageError);
}

TEST_CASE("labels print and parse canonically") {
  for (std::string s : {"aut(dlo)", "power(aut(dlo),2)", "stab(aut(dlo); 0)", "aut(rado)", "aut(ordered-rado)",
                        "aut(pureset)", "stab(power(aut(dlo),2); (0,1))"}) {
    auto g = parse_group(s);
    for (int k = 1; k <= 3; ++k)
      for (const auto& l : g.enumerate_labels(k)) {
        auto text = g.label_str(l);
        CHECK_MESSAGE(g.parse_label(text) == l, s << " " << text);
      }
  }
  auto g = dlo();
  CHECK_THROWS(g.parse_label("1<1"));
  CHECK_THROWS(g.parse_label("2<1=3<"));
}

TEST_CASE("stabilizer coarsening and power decomposition on samples") {
  std::mt19937 rng(3);
  auto g = dlo();
  auto st = GroupPresentation::stabilizer(g, {q(0), q(1, 2)});
  auto p2 = GroupPresentation::power(g, 2);
  auto elem = [&] { return g.point(rng() % 12); };
  for (int trial = 0; trial < 2000; ++trial) {
    int k = 1 + trial % 3;
    std::vector<Point> s, t, ps, pt;
    for (int i = 0; i < k; ++i) {
      s.push_back(elem());
      t.push_back(elem());
      ps.push_back(p2.point(rng() % 30));
      pt.push_back(p2.point(rng() % 30));
    }
    if (st.same_orbit(s, t)) CHECK(g.same_orbit(s, t));
    bool cols = true;
    for (int c = 0; c < 2; ++c) {
      std::vector<Point> cs, ct;
      for (int i = 0; i < k; ++i) {
        cs.push_back(Point(ps[i].coords[c]));
        ct.push_back(Point(pt[i].coords[c]));
      }
      cols = cols && g.same_orbit(cs, ct);
    }
    CHECK(p2.same_orbit(ps, pt) == cols);
  }
}

TEST_CASE("power points enumerate by largest index then lexicographically") {
  auto p2 = GroupPresentation::power(dlo(), 2);
  CHECK(p2.point(0) == q2(0, 0));
  CHECK(p2.point(1) == q2(0, 1));
  CHECK(p2.point(2) == q2(1, 0));
  CHECK(p2.point(3) == q2(1, 1));
  CHECK(p2.point(4) == q2(0, -1));
  CHECK(p2.point(8) == q2(-1, -1));
}

TEST_CASE("automorphism_extending") {
  auto g = dlo();
  auto a = automorphism_extending(g, {{Element(Rational(1)), Element(Rational(10))},
                                      {Element(Rational(2)), Element(Rational(20))}});
  CHECK(a.certified());
  // Enumeration-least rational strictly between 10 and 20, by direct scan.
  Rational expected;
  for (std::size_t n = 0;; ++n) {
    Rational r = dlo_element(n);
    if (Rational(10) < r && r < Rational(20)) {
      expected = r;
      break;
    }
  }
  CHECK(a.extend(Element(Rational(3, 2))).rational() == expected);

  auto empty = automorphism_extending(g, {});
  CHECK(empty.size() == 0);
  CHECK(empty.certified());

  CHECK_THROWS_AS(automorphism_extending(g, {{Element(Rational(1)), Element(Rational(5))},
                                             {Element(Rational(2)), Element(Rational(4))}}),
                  TypeMismatch);
}

TEST_CASE("automorphism_extending keeps its certificate under extension demands") {
  std::mt19937 rng(5);
  // Rado partners over k vertices need on the order of 2^k elements, so the
  // rado chains stay short.
  for (auto [name, steps, pool] : {std::tuple{"dlo", 10, 20}, std::tuple{"rado", 4, 6}}) {
    auto g = GroupPresentation::aut(builtin_limit(name));
    for (int trial = 0; trial < 20; ++trial) {
      auto x = g.point(rng() % 8).coords[0], y = g.point(rng() % 8).coords[0];
      auto a = automorphism_extending(g, {{x, y}});
      for (int step = 0; step < steps; ++step) {
        auto z = g.point(rng() % pool).coords[0];
        if (step % 2 == 0)
          a.extend(z);
        else
          a.extend_back(z);
        CHECK(a.certified());
      }
    }
  }
}
