#include "doctest.h"

#include <algorithm>

#include "canonfn/errors.hpp"
#include "canonfn/symbolic_dlo.hpp"

using namespace canonfn;

namespace {

GroupPresentation dlo() { return GroupPresentation::aut(builtin_limit("dlo")); }
Rational r(std::int64_t n, std::int64_t d = 1) { return Rational(n, d); }

std::shared_ptr<BackAndForthMap> pham() {
  return canonical_iso(ComputableDenseSet::rationals(), ComputableDenseSet::rationals_without_zero());
}

// Order preservation and membership, checked pairwise from scratch.
void check_increasing(const std::vector<std::pair<Rational, Rational>>& pairs, const ComputableDenseSet& src,
                      const ComputableDenseSet& tgt) {
  for (const auto& [x, y] : pairs) {
    CHECK(src.member(x));
    CHECK(tgt.member(y));
  }
  for (const auto& [x1, y1] : pairs)
    for (const auto& [x2, y2] : pairs) CHECK((x1 < x2) == (y1 < y2));
}

}  // namespace

TEST_CASE("dense sets") {
  auto q = ComputableDenseSet::rationals();
  auto q0 = ComputableDenseSet::rationals_without_zero();
  CHECK(q0.element(0) == r(1));
  CHECK(q0.element(1) == r(-1));
  for (std::size_t i = 0; i < 200; ++i) {
    CHECK(q.index_of(q.element(i)) == i);
    CHECK(q0.index_of(q0.element(i)) == i);
    CHECK(q0.element(i).sign() != 0);
  }
  CHECK(q0.least_in(r(-1), r(1)) == r(1, 2));
  CHECK(q.least_in(r(-1), r(1)) == r(0));
  CHECK(q.before(r(1), r(-1)));
  CHECK_THROWS_AS(ComputableDenseSet::by_name("z"), std::invalid_argument);
  CHECK_NOTHROW(probe_density(q));
  CHECK_NOTHROW(probe_density(q0));

  auto integers = ComputableDenseSet::scanned(
      "z", [](const Rational& x) { return x.is_integer(); },
      [](std::size_t n) { return n % 2 ? Rational(std::int64_t(n / 2 + 1)) : -Rational(std::int64_t(n / 2)); }, 256);
  CHECK_THROWS_AS(probe_density(integers), DensityProbeFailure);
  CHECK_THROWS_AS(canonical_iso(integers, q), DensityProbeFailure);
}

TEST_CASE("back-and-forth between Q and Q is the identity") {
  auto q = ComputableDenseSet::rationals();
  auto m = canonical_iso(q, q);
  for (std::size_t i = 0; i < 64; ++i) CHECK(m->eval(q.element(i)) == q.element(i));
  for (const auto& [x, y] : m->commitments()) CHECK(x == y);
  CHECK(m->sound());
}

TEST_CASE("Q onto Q minus 0") {
  auto m = pham();
  auto q = ComputableDenseSet::rationals();
  auto q0 = ComputableDenseSet::rationals_without_zero();
  std::vector<std::pair<Rational, Rational>> pairs;
  for (std::size_t i = 0; i < 48; ++i) pairs.emplace_back(q.element(i), m->eval(q.element(i)));
  check_increasing(pairs, q, q0);
  for (std::size_t i = 0; i < 48; ++i) CHECK(m->eval(m->inverse(q0.element(i))) == q0.element(i));
  CHECK_THROWS_AS(m->inverse(r(0)), DomainGap);
  CHECK(m->sound());
  check_increasing(m->commitments(), q, q0);

  // Commit order alternates forth and back: stage 2i commits the least
  // uncommitted source member.
  auto log = pham()->commitments();
  CHECK(log.empty());
  auto fresh = pham();
  fresh->run_stages(6);
  log = fresh->commitments();
  REQUIRE(log.size() == 6);
  CHECK(log[0].first == r(0));
  CHECK(log[0].second == r(1));
  CHECK(log[1].second == r(-1));
  CHECK(log[1].first < r(0));
}

TEST_CASE("back-and-forth is deterministic") {
  auto a = pham(), b = pham();
  auto q = ComputableDenseSet::rationals();
  for (std::size_t i = 0; i < 32; ++i) CHECK(a->eval(q.element(i)) == b->eval(q.element(i)));
  // Evaluation order does not change values.
  auto c = pham();
  for (std::size_t i = 32; i-- > 0;) CHECK(c->eval(q.element(i)) == a->eval(q.element(i)));
}

TEST_CASE("every stage keeps the map sound") {
  auto m = pham();
  for (int i = 0; i < 200; ++i) {
    m->run_stages(1);
    REQUIRE(m->sound());
  }
  CHECK(m->stages() == 200);
  BackAndForthMap tight(ComputableDenseSet::rationals(), ComputableDenseSet::rationals(), {}, 4);
  CHECK_THROWS_AS(tight.eval(r(1, 7)), BudgetExhausted);
}

TEST_CASE("automorphism_moving") {
  auto q = ComputableDenseSet::rationals();
  for (auto [a, b] : {std::pair{r(0), r(5)}, std::pair{r(-1, 2), r(3, 4)}, std::pair{r(2), r(-7, 3)}}) {
    auto alpha = automorphism_moving(a, b);
    CHECK(alpha->eval(a) == b);
    std::vector<std::pair<Rational, Rational>> pairs;
    for (std::size_t i = 0; i < 40; ++i) pairs.emplace_back(q.element(i), alpha->eval(q.element(i)));
    check_increasing(pairs, q, q);
    for (std::size_t i = 0; i < 40; ++i) CHECK(alpha->eval(alpha->inverse(q.element(i))) == q.element(i));
  }
  auto q2 = ComputableDenseSet::rationals();
  CHECK_THROWS_AS(BackAndForthMap(q, q2, {{r(0), r(1)}, {r(1), r(0)}}), std::invalid_argument);
}

TEST_CASE("forced_cut") {
  auto id = FunctionOracle::identity();
  auto b = forced_cut(id, id, r(0), r(1, 4), 2048);
  REQUIRE(b);
  CHECK(b->lo < r(0));
  CHECK(r(0) < b->hi);
  CHECK(b->hi - b->lo < r(1, 4));
  CHECK(b->lo == b->x_lo);
  CHECK_FALSE(forced_cut(id, id, r(0), r(1, 4), 64));

  auto shift = FunctionOracle::pieces(parse_pieces("[(-inf,inf):x+1]"));
  auto s = forced_cut(id, shift, r(0), r(1, 4), 2048);
  REQUIRE(s);
  CHECK(s->lo < r(1));
  CHECK(r(1) < s->hi);
}

TEST_CASE("the Q onto Q minus 0 map is canonical on finite samples") {
  auto g = dlo();
  auto f = map_oracle(pham(), "pham");
  auto v = check_canonical(f, g, g, 16, 3);
  REQUIRE(std::holds_alternative<CanonicalUpTo>(v));
  auto& b = std::get<CanonicalUpTo>(v).behavior;
  CHECK(g.label_str(*b.lookup(g.parse_label("1<2"))) == "1<2");
  CHECK(g.label_str(*b.lookup(g.parse_label("2<1"))) == "2<1");

  // f and f o alpha agree locally on every subset of the first 12 points.
  auto m = pham();
  auto fv = map_oracle(m, "pham");
  Rational a, bb;
  for (std::size_t i = 0;; ++i)
    if (m->eval(dlo_element(i)).sign() < 0) {
      a = dlo_element(i);
      break;
    }
  for (std::size_t i = 0;; ++i)
    if (m->eval(dlo_element(i)).sign() > 0) {
      bb = dlo_element(i);
      break;
    }
  auto fa = FunctionOracle::compose(fv, map_oracle(automorphism_moving(a, bb), "alpha"));
  std::vector<Point> pts;
  for (std::size_t i = 0; i < 12; ++i) pts.push_back(g.point(i));
  for (unsigned mask = 1; mask < (1u << 12); ++mask) {
    std::vector<Point> sub;
    for (int i = 0; i < 12; ++i)
      if (mask >> i & 1u) sub.push_back(pts[i]);
    REQUIRE(local_equal(fv, fa, sub, g));
  }
  auto t = tower_witness({{fv, fa}}, g, g, 8);
  REQUIRE(std::holds_alternative<TowerWitness>(t));
  CHECK(check_tower(std::get<TowerWitness>(t), g));
}

TEST_CASE("obstruction certificates") {
  {
    auto c = pham_refute(r(1, 8), 512);
    CHECK(c.e_y1 == r(-1, 9));
    CHECK(c.e_y2 == r(1, 9));
    CHECK(c.y1.sign() < 0);
    auto check = check_certificate(c);
    for (const auto& [name, holds] : check.claims) CHECK_MESSAGE(holds, name);
    CHECK(check.ok());
    auto text = certificate_str(c);
    CHECK(certificate_str(parse_certificate(text)) == text);
    CHECK(check_certificate(parse_certificate(text)).ok());

    auto forged = c;
    forged.e_y1 = forged.e_y1 - r(1, 1000);
    CHECK_FALSE(check_certificate(forged).ok());
  }
  CHECK_THROWS_AS(pham_refute(r(10), 512), std::invalid_argument);
  CHECK_THROWS_AS(pham_refute(r(1, 8), 4), BudgetExhausted);
  CHECK_THROWS_AS(parse_certificate("epsilon: 1/8\nbogus: 1\n"), FormatError);
  try {
    parse_certificate("epsilon: 1/8\na: x\n");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.line() == 2);
  }
}
