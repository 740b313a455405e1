#include "doctest.h"

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>

#include "canonfn/rational.hpp"

using canonfn::Rational;
using canonfn::dlo_element;
using canonfn::dlo_index;
using canonfn::enumeration_less;
using canonfn::least_in_interval;

TEST_CASE("rationals normalize and compare exactly") {
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK(Rational(3, -6) == Rational(-1, 2));
  CHECK(Rational(-1, 2).den() == 2);
  CHECK(Rational(1, 3) < Rational(1, 2));
  CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
  CHECK(Rational(2, 3) * Rational(3, 4) == Rational(1, 2));
  CHECK(Rational(1) / Rational(-3) == Rational(-1, 3));
  CHECK_THROWS_AS(Rational(1, 0), std::domain_error);
  CHECK_THROWS_AS(Rational(INT64_MAX) + Rational(1), std::overflow_error);
}

TEST_CASE("rational text form") {
  CHECK(Rational(5).str() == "5");
  CHECK(Rational(-3, 7).str() == "-3/7");
  CHECK(Rational::parse("6/4") == Rational(3, 2));
  CHECK(Rational::parse("-2") == Rational(-2));
  CHECK_THROWS(Rational::parse("1/"));
  CHECK_THROWS(Rational::parse("a"));
  CHECK_THROWS(Rational::parse("1/0"));
}

TEST_CASE("dlo enumeration follows the sign-alternating Calkin-Wilf order") {
  CHECK(canonfn::dlo_element(0) == Rational(0));
  CHECK(canonfn::dlo_element(1) == Rational(1));
  CHECK(canonfn::dlo_element(2) == Rational(-1));
  CHECK(canonfn::dlo_element(3) == Rational(1, 2));
  CHECK(canonfn::dlo_element(4) == Rational(-1, 2));
  CHECK(canonfn::dlo_element(5) == Rational(2));
  CHECK(canonfn::dlo_element(6) == Rational(-2));
  CHECK(canonfn::dlo_element(7) == Rational(1, 3));

  // Independent recurrence: q' = 1 / (2 floor(q) - q + 1).
  Rational q(1);
  for (std::size_t i = 0; i < 200; ++i) {
    CHECK(canonfn::calkin_wilf(i) == q);
    std::int64_t fl = q.num() / q.den();
    q = Rational(1) / (Rational(2 * fl) - q + Rational(1));
  }
}

TEST_CASE("dlo_index inverts dlo_element and the enumeration is injective") {
  std::set<Rational> seen;
  for (std::size_t i = 0; i < 2000; ++i) {
    Rational r = canonfn::dlo_element(i);
    CHECK(canonfn::dlo_index(r) == i);
    CHECK(seen.insert(r).second);
  }
}

TEST_CASE("enumeration_less agrees with indices") {
  for (std::size_t i = 0; i < 300; ++i)
    for (std::size_t j = 0; j < 300; ++j)
      CHECK(enumeration_less(dlo_element(i), dlo_element(j)) == (i < j));
  CHECK(enumeration_less(Rational(1, 100), Rational(1, 101)));
  CHECK_THROWS_AS(dlo_index(Rational(1, 100)), std::overflow_error);
}

TEST_CASE("least_in_interval matches a scan of the enumeration") {
  std::mt19937 rng(17);
  auto scan = [](std::optional<Rational> lo, std::optional<Rational> hi, bool avoid_zero) {
    for (std::size_t n = 0; n < (1u << 16); ++n) {
      Rational r = dlo_element(n);
      if (avoid_zero && r.sign() == 0) continue;
      if ((!lo || *lo < r) && (!hi || r < *hi)) return std::optional<Rational>(r);
    }
    return std::optional<Rational>();
  };
  int checked = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    Rational a = dlo_element(rng() % 400), b = dlo_element(rng() % 400);
    if (a == b) continue;
    if (b < a) std::swap(a, b);
    std::optional<Rational> lo = a, hi = b;
    if (trial % 7 == 0) lo.reset();
    if (trial % 11 == 0) hi.reset();
    const bool avoid = trial % 2 == 0;
    auto expected = scan(lo, hi, avoid);
    if (!expected) continue;
    CHECK(least_in_interval(lo, hi, avoid) == *expected);
    ++checked;
  }
  CHECK(checked > 2000);
}
