#include "doctest.h"

#include <random>

#include "canonfn/canonicity.hpp"
#include "canonfn/errors.hpp"
#include "oracles.hpp"

using namespace canonfn;

namespace {

GroupPresentation dlo() { return GroupPresentation::aut(builtin_limit("dlo")); }
Point q(std::int64_t n, std::int64_t d = 1) { return rational_point(Rational(n, d)); }

FunctionOracle mixed() { return FunctionOracle::pieces(parse_pieces("[(-inf,0):x*-1; [0,inf):x]")); }

std::vector<Rational> values(const std::vector<Point>& t) {
  std::vector<Rational> out;
  for (const auto& p : t) out.push_back(p.coords[0].rational());
  return out;
}

// Random piecewise map with up to three pieces; breakpoints among small
// rationals, each piece increasing, decreasing or constant.
FunctionOracle random_pieces(std::mt19937& rng) {
  const int count = 1 + rng() % 3;
  std::vector<Rational> cuts;
  while (static_cast<int>(cuts.size()) < count - 1) {
    Rational c = dlo_element(rng() % 12);
    if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<AffinePiece> pieces;
  for (int i = 0; i < count; ++i) {
    AffinePiece p;
    if (i > 0) {
      p.lo = cuts[i - 1];
      p.lo_closed = true;
    }
    if (i + 1 < count) p.hi = cuts[i];
    const int kind = rng() % 3;
    p.slope = kind == 0 ? Rational(1 + rng() % 3) : kind == 1 ? Rational(-1 - int(rng() % 3)) : Rational(0);
    p.offset = dlo_element(rng() % 8);
    pieces.push_back(p);
  }
  return FunctionOracle::pieces(pieces);
}

const BehaviorTable& table_sending(const std::vector<BehaviorTable>& tables, const char* pair_image) {
  auto g = dlo();
  for (const auto& b : tables)
    if (g.label_str(*b.lookup(g.parse_label("1<2"))) == pair_image) return b;
  throw std::logic_error("no such table");
}

}  // namespace

TEST_CASE("affine pieces parse and validate") {
  auto f = mixed();
  CHECK(f.name() == "pieces:[(-inf,0):x*-1; [0,inf):x]");
  CHECK(f(q(-3)) == q(3));
  CHECK(f(q(2)) == q(2));
  CHECK(parse_affine("2*x+1/2") == std::pair{Rational(2), Rational(1, 2)});
  CHECK(parse_affine("-x+3") == std::pair{Rational(-1), Rational(3)});
  CHECK(parse_affine("x*-1") == std::pair{Rational(-1), Rational(0)});
  CHECK(parse_affine("5/2") == std::pair{Rational(0), Rational(5, 2)});
  CHECK_THROWS_AS(parse_affine("x*x"), UsageError);
  CHECK_THROWS_AS(parse_pieces("[(-inf,0):x*-1"), UsageError);
  CHECK_THROWS_AS(FunctionOracle::pieces(parse_pieces("[(-inf,0):x; (0,inf):x]")), std::invalid_argument);
  CHECK_THROWS_AS(FunctionOracle::pieces(parse_pieces("[(-inf,0]:x; [0,inf):x]")), std::invalid_argument);
  CHECK_THROWS_AS(FunctionOracle::pieces(parse_pieces("[(-inf,1):x]")), std::invalid_argument);
}

TEST_CASE("function tables round-trip and reject duplicates") {
  auto g = dlo();
  std::vector<std::pair<Point, Point>> pairs{{q(0), q(1)}, {q(1, 2), q(-3)}};
  auto text = function_table_str(pairs);
  CHECK(text == "0 -> 1\n1/2 -> -3\n");
  auto f = parse_function_table("# header\n" + text, g, g);
  CHECK(f(q(1, 2)) == q(-3));
  CHECK_THROWS_AS(f(q(7)), DomainGap);
  try {
    parse_function_table("0 -> 1\n\n0 -> 2\n", g, g);
    FAIL("duplicate accepted");
  } catch (const FormatError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_function_table("0 1\n", g, g), FormatError);
}

TEST_CASE("check_canonical on identity, negation and constants") {
  auto g = dlo();
  auto tables = enumerate_behaviors(g, g, 3);

  auto id = check_canonical(FunctionOracle::identity(), g, g, 8, 2);
  REQUIRE(std::holds_alternative<CanonicalUpTo>(id));
  CHECK(std::get<CanonicalUpTo>(id).behavior.maps[1] == table_sending(tables, "1<2").maps[1]);

  auto neg = check_canonical(FunctionOracle::negation(), g, g, 8, 3);
  REQUIRE(std::holds_alternative<CanonicalUpTo>(neg));
  const auto& behavior = std::get<CanonicalUpTo>(neg).behavior;
  CHECK(behavior == table_sending(tables, "2<1"));
  // Direct comparison: negation reverses the rank pattern of every tuple.
  for (const auto& idx : index_maps(3, 8)) {
    std::vector<Rational> t, nt;
    for (int i : idx) {
      t.push_back(dlo_element(i));
      nt.push_back(-dlo_element(i));
    }
    auto r = oracle::ranks(t), nr = oracle::ranks(nt);
    int top = *std::max_element(r.begin(), r.end());
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(nr[i] == top - r[i]);
  }

  auto c = behavior_of(FunctionOracle::constant(Rational(3)), g, g, 8, 2);
  CHECK(c == table_sending(enumerate_behaviors(g, g, 2), "1=2"));
}

TEST_CASE("the mixed map is refuted by the first scanned pair") {
  auto g = dlo();
  auto v = check_canonical(mixed(), g, g, 8, 2);
  REQUIRE(std::holds_alternative<Counterexample>(v));
  const auto& c = std::get<Counterexample>(v);
  CHECK(c.s == std::vector<Point>{q(0), q(-1)});
  CHECK(c.t == std::vector<Point>{q(1), q(0)});
  CHECK(g.label_str(c.source_label) == "2<1");
  CHECK(g.label_str(c.image_label_s) == "1<2");
  CHECK(g.label_str(c.image_label_t) == "2<1");
  CHECK(verify_counterexample(mixed(), g, g, c));
  CHECK_THROWS_AS(behavior_of(mixed(), g, g, 8, 2), NotCanonical);
  auto text = verdict_str(v, g, g);
  CHECK(text.find("verdict: counterexample\n") == 0);
  CHECK(text.find("witness_s: 0 -1\n") != std::string::npos);
  CHECK(text.find("witness_t: 1 0\n") != std::string::npos);
}

TEST_CASE("counterexamples recompute and persist at larger horizons") {
  std::mt19937 rng(23);
  auto g = dlo();
  int refuted = 0;
  for (int trial = 0; trial < 60; ++trial) {
    auto f = random_pieces(rng);
    std::optional<Counterexample> earlier;
    for (std::size_t n : {6u, 10u, 14u}) {
      auto v = check_canonical(f, g, g, n, 2);
      if (auto* c = std::get_if<Counterexample>(&v)) {
        CHECK(verify_counterexample(f, g, g, *c));
        ++refuted;
      } else {
        CHECK_FALSE(earlier);
      }
      if (auto* c = std::get_if<Counterexample>(&v)) earlier = *c;
    }
  }
  CHECK(refuted > 0);
}

TEST_CASE("check_canonical on power sources") {
  auto g2 = GroupPresentation::power(dlo(), 2);
  auto v = check_canonical(FunctionOracle::projection(0, 2), g2, dlo(), 12, 2);
  CHECK(std::holds_alternative<CanonicalUpTo>(v));
  auto m = check_canonical(FunctionOracle::minimum(2), g2, dlo(), 12, 2);
  REQUIRE(std::holds_alternative<Counterexample>(m));
  CHECK(verify_counterexample(FunctionOracle::minimum(2), g2, dlo(), std::get<Counterexample>(m)));
}

TEST_CASE("local_equal examples and equivalence") {
  auto g = dlo();
  std::vector<Point> f01{q(0), q(1)};
  CHECK(local_equal(mixed(), mixed(), f01, g));
  CHECK_FALSE(local_equal(FunctionOracle::identity(), FunctionOracle::negation(), f01, g));

  std::mt19937 rng(29);
  std::vector<FunctionOracle> fs;
  for (int i = 0; i < 8; ++i) fs.push_back(random_pieces(rng));
  fs.push_back(FunctionOracle::identity());
  fs.push_back(FunctionOracle::negation());
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Point> F;
    for (int i = 0; i < 1 + int(rng() % 4); ++i) {
      auto p = g.point(rng() % 16);
      if (std::find(F.begin(), F.end(), p) == F.end()) F.push_back(p);
    }
    const auto& a = fs[rng() % fs.size()];
    const auto& b = fs[rng() % fs.size()];
    const auto& c = fs[rng() % fs.size()];
    CHECK(local_equal(a, a, F, g));
    CHECK(local_equal(a, b, F, g) == local_equal(b, a, F, g));
    if (local_equal(a, b, F, g) && local_equal(b, c, F, g)) CHECK(local_equal(a, c, F, g));
  }
}

TEST_CASE("tower_witness examples") {
  auto g = dlo();
  auto same = tower_witness({{mixed(), mixed()}}, g, g, 4);
  REQUIRE(std::holds_alternative<TowerWitness>(same));
  const auto& w = std::get<TowerWitness>(same);
  CHECK(w.levels.size() == 4);
  CHECK(check_tower(w, g));
  for (const auto& level : w.levels) CHECK(level.joint == level.blocks[0]);

  auto bad = tower_witness({{FunctionOracle::identity(), FunctionOracle::negation()}}, g, g, 2);
  REQUIRE(std::holds_alternative<LocalFailure>(bad));
  CHECK(std::get<LocalFailure>(bad).pair == 0);
  CHECK(std::get<LocalFailure>(bad).points == std::vector<Point>{q(0), q(1)});

  // Several pairs: the joint label spans all f-blocks.
  auto shifted = FunctionOracle::pieces(parse_pieces("[(-inf,inf):x+5]"));
  auto many = tower_witness({{FunctionOracle::identity(), shifted}, {FunctionOracle::negation(), FunctionOracle::negation()}},
                            g, g, 5);
  REQUIRE(std::holds_alternative<TowerWitness>(many));
  CHECK(check_tower(std::get<TowerWitness>(many), g));
  auto tampered = std::get<TowerWitness>(many);
  std::swap(tampered.levels[3].blocks[0], tampered.levels[3].blocks[1]);
  CHECK_FALSE(check_tower(tampered, g));
}

TEST_CASE("proposition harness examples") {
  auto g = dlo();
  auto neg = proposition_harness(FunctionOracle::negation(), g, g, 8, 2);
  CHECK(std::holds_alternative<CanonicalUpTo>(neg.proxy1));
  CHECK(neg.proxy2);
  CHECK(neg.proxy3);
  CHECK(neg.agree);
  CHECK(neg.witnesses_match);

  auto mix = proposition_harness(mixed(), g, g, 8, 2);
  CHECK(std::holds_alternative<Counterexample>(mix.proxy1));
  CHECK_FALSE(mix.proxy2);
  CHECK_FALSE(mix.proxy3);
  CHECK(mix.agree);
  CHECK(mix.witnesses_match);

  auto id = proposition_harness(FunctionOracle::identity(), g, g, 4, 2);
  CHECK(id.agree);
  for (const auto& s : id.samples) {
    REQUIRE(std::holds_alternative<TowerWitness>(s.tower));
    for (const auto& level : std::get<TowerWitness>(s.tower).levels) CHECK(level.joint == level.blocks[0]);
  }
}

TEST_CASE("harness proxies agree sample by sample") {
  std::mt19937 rng(31);
  auto g = dlo();
  for (int trial = 0; trial < 25; ++trial) {
    auto f = random_pieces(rng);
    auto r = proposition_harness(f, g, g, 7, 2);
    CHECK_MESSAGE(r.agree, f.name() << " " << r.discrepancy);
    CHECK(r.witnesses_match);
    for (const auto& s : r.samples) CHECK(s.local_ok == std::holds_alternative<TowerWitness>(s.tower));
  }
}
