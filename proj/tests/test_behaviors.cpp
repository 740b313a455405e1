#include "doctest.h"

#include <random>

#include "canonfn/behaviors.hpp"
#include "canonfn/errors.hpp"
#include "oracles.hpp"

using namespace canonfn;

namespace {

GroupPresentation aut(const char* name) { return GroupPresentation::aut(builtin_limit(name)); }

// A tuple of the first few enumeration points realizing `label`.
std::vector<Point> realize(const GroupPresentation& g, const OrbitLabel& label) {
  const int k = g.label_arity(label);
  for (const auto& idx : index_maps(k, 8)) {
    std::vector<Point> t;
    for (int i : idx) t.push_back(g.point(i));
    if (g.label(t) == label) return t;
  }
  FAIL("label not realized among the first 8 points");
  return {};
}

template <typename Pattern>
oracle::PatternMap as_pattern_map(const BehaviorTable& b, Pattern pattern) {
  oracle::PatternMap out;
  for (const auto& m : b.maps)
    for (const auto& [from, to] : m) out[pattern(realize(b.source, from))] = pattern(realize(b.target, to));
  return out;
}

std::vector<Rational> values(const std::vector<Point>& t) {
  std::vector<Rational> out;
  for (const auto& p : t) out.push_back(p.coords[0].rational());
  return out;
}

std::vector<std::size_t> indices(const std::vector<Point>& t) {
  std::vector<std::size_t> out;
  for (const auto& p : t) out.push_back(p.coords[0].index_value());
  return out;
}

BehaviorTable pair_table(const GroupPresentation& g, std::initializer_list<std::pair<const char*, const char*>> pairs) {
  BehaviorTable b(g, g, 2);
  b.maps[0][g.parse_label("1")] = g.parse_label("1");
  for (auto [from, to] : pairs) b.maps[1][g.parse_label(from)] = g.parse_label(to);
  return b;
}

}  // namespace

TEST_CASE("reindex examples") {
  auto g = aut("dlo");
  std::vector<int> swap{1, 0}, dup{0, 0}, drop{0, 2};
  CHECK(g.label_str(g.reindex(g.parse_label("1<2"), swap)) == "2<1");
  CHECK(g.label_str(g.reindex(g.parse_label("1<2"), dup)) == "1=2");
  CHECK(g.label_str(g.reindex(g.parse_label("1<2<3"), drop)) == "1<2");
}

TEST_CASE("reindex is functorial") {
  std::mt19937 rng(11);
  for (auto g : {aut("dlo"), aut("rado"), GroupPresentation::power(aut("dlo"), 2),
                 GroupPresentation::stabilizer(aut("dlo"), {rational_point(Rational(0))})}) {
    for (int trial = 0; trial < 300; ++trial) {
      int k = 1 + rng() % 4, j = 1 + rng() % 4, i = 1 + rng() % 4;
      if (g.kind() != GroupPresentation::Kind::AutLimit) k = std::min(k, 3);
      auto labels = g.enumerate_labels(k);
      const auto& tau = labels[rng() % labels.size()];
      std::vector<int> sigma(j), rho(i), comp(i);
      for (auto& s : sigma) s = rng() % k;
      for (auto& r : rho) r = rng() % j;
      for (int x = 0; x < i; ++x) comp[x] = sigma[rho[x]];
      CHECK(g.reindex(g.reindex(tau, sigma), rho) == g.reindex(tau, comp));
    }
  }
}

TEST_CASE("coherence_check examples") {
  auto g = aut("dlo");
  auto reversal = pair_table(g, {{"1=2", "1=2"}, {"1<2", "2<1"}, {"2<1", "1<2"}});
  CHECK_FALSE(coherence_check(reversal));

  auto collapse = pair_table(g, {{"1=2", "1=2"}, {"1<2", "1<2"}, {"2<1", "1<2"}});
  auto v = coherence_check(collapse);
  REQUIRE(v);
  CHECK(v->k == 2);
  CHECK(v->sigma == std::vector<int>{1, 0});
  CHECK(g.label_str(v->label) == "1<2");

  BehaviorTable unary(g, g, 1);
  unary.maps[0][g.parse_label("1")] = g.parse_label("1");
  CHECK_FALSE(coherence_check(unary));
}

TEST_CASE("enumerate_behaviors agrees with functions on small chains") {
  auto g = aut("dlo");
  auto rank_pattern = [](const auto& t) {
    if constexpr (std::is_same_v<std::decay_t<decltype(t)>, std::vector<Point>>)
      return oracle::ranks(values(t));
    else
      return oracle::ranks(t);
  };
  for (int k : {2, 3}) {
    auto tables = enumerate_behaviors(g, g, k);
    CHECK(tables.size() == 3);
    std::set<oracle::PatternMap> ours;
    for (const auto& b : tables) {
      CHECK_FALSE(coherence_check(b));
      CHECK(b.total());
      ours.insert(as_pattern_map(b, rank_pattern));
    }
    CHECK(ours == oracle::induced_pattern_maps(5, k, [](const std::vector<int>& t) { return oracle::ranks(t); }));
  }
}

TEST_CASE("enumerate_behaviors on pure sets") {
  auto g = aut("pureset");
  auto tables = enumerate_behaviors(g, g, 2);
  CHECK(tables.size() == 2);
  std::set<oracle::PatternMap> ours;
  for (const auto& b : tables) {
    CHECK_FALSE(coherence_check(b));
    ours.insert(as_pattern_map(b, [](const std::vector<Point>& t) { return oracle::equalities(indices(t)); }));
  }
  CHECK(ours == oracle::induced_pattern_maps(4, 2, [](const std::vector<int>& t) { return oracle::equalities(t); }));
}

TEST_CASE("arity 2 and 3 tables restrict consistently") {
  auto g = aut("dlo");
  auto two = enumerate_behaviors(g, g, 2);
  auto three = enumerate_behaviors(g, g, 3);
  REQUIRE(two.size() == three.size());
  for (std::size_t i = 0; i < two.size(); ++i) {
    CHECK(three[i].maps[0] == two[i].maps[0]);
    CHECK(three[i].maps[1] == two[i].maps[1]);
  }
}

TEST_CASE("enumerate_behaviors respects the arity limit") {
  set_arity_limit(2);
  CHECK_THROWS_AS(enumerate_behaviors(aut("dlo"), aut("dlo"), 3), ArityLimitExceeded);
  set_arity_limit(6);
}

TEST_CASE("realize_behavior") {
  auto g = aut("dlo");
  auto tables = enumerate_behaviors(g, g, 2);
  auto find = [&](const char* lt) {
    for (const auto& b : tables)
      if (g.label_str(*b.lookup(g.parse_label("1<2"))) == lt) return b;
    FAIL("no table");
    return tables[0];
  };
  auto decreasing = find("2<1");
  auto w = realize_behavior(decreasing, 3);
  REQUIRE(w);
  // Domain 0, 1, -1 maps to 0, -1, 1 by least enumeration indices.
  CHECK(w->image_indices == std::vector<std::size_t>{0, 2, 1});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      if (values(w->domain)[i] < values(w->domain)[j]) CHECK(values(w->images)[j] < values(w->images)[i]);

  auto constant = find("1=2");
  auto c = realize_behavior(constant, 4);
  REQUIRE(c);
  CHECK(std::set<Point>(c->images.begin(), c->images.end()).size() == 1);

  auto bad = pair_table(g, {{"1<2", "1<2"}, {"2<1", "2<1"}, {"1=2", "1<2"}});
  CHECK_FALSE(realize_behavior(bad, 2));
}

TEST_CASE("realized witnesses reproduce their tables") {
  for (const char* name : {"dlo", "pureset"}) {
    auto g = aut(name);
    for (const auto& b : enumerate_behaviors(g, g, 2)) {
      auto w = realize_behavior(b, 4);
      REQUIRE(w);
      BehaviorTable seen(g, g, 2);
      for (const auto& idx : index_maps(1, 4))
        seen.maps[0][g.label(std::vector<Point>{w->domain[idx[0]]})] =
            g.label(std::vector<Point>{w->images[idx[0]]});
      for (const auto& idx : index_maps(2, 4))
        seen.maps[1][g.label(std::vector<Point>{w->domain[idx[0]], w->domain[idx[1]]})] =
            g.label(std::vector<Point>{w->images[idx[0]], w->images[idx[1]]});
      for (int k = 0; k < 2; ++k)
        for (const auto& [from, to] : seen.maps[k]) CHECK(*b.lookup(from) == to);
    }
  }
}

TEST_CASE("behavior tables round-trip through text") {
  for (auto g : {aut("dlo"), GroupPresentation::power(aut("dlo"), 2)}) {
    for (const auto& b : enumerate_behaviors(g, aut("dlo"), 2)) {
      auto text = behavior_str(b);
      auto back = parse_behavior(text);
      CHECK(back == b);
      CHECK(behavior_str(back) == text);
    }
  }
  CHECK_THROWS_AS(parse_behavior("source: aut(dlo)\ntarget: aut(dlo)\narity: 2\n2: 1<2 -> 1<\n"), FormatError);
  try {
    parse_behavior("source: aut(dlo)\n# comment\ntarget: aut(dlo)\narity: 1\n1: 1 -> 1\n1: 1 -> 1\n");
    FAIL("duplicate accepted");
  } catch (const FormatError& e) {
    CHECK(e.line() == 6);
  }
}
