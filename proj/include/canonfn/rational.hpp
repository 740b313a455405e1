#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

namespace canonfn {

// Exact rational in lowest terms with a positive denominator. Arithmetic is
// carried out in 128 bits and throws std::overflow_error when the reduced
// result does not fit back into 64 bits.
class Rational {
public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num_(n) {}  // NOLINT(implicit)
  Rational(std::int64_t n, std::int64_t d);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  bool is_integer() const { return den_ == 1; }
  int sign() const { return num_ > 0 ? 1 : (num_ < 0 ? -1 : 0); }

  Rational operator-() const;
  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  Rational operator/(const Rational& o) const;
  Rational abs() const { return sign() < 0 ? -*this : *this; }

  bool operator==(const Rational& o) const = default;
  std::strong_ordering operator<=>(const Rational& o) const;

  // `p/q`, or `p` when q == 1.
  std::string str() const;

  // Accepts `p`, `-p`, `p/q`; throws std::invalid_argument on anything else.
  static Rational parse(std::string_view text);

private:
  static Rational from_wide(__int128 n, __int128 d);

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

// Positive rationals in Calkin-Wilf order: 1, 1/2, 2, 1/3, 3/2, 2/3, 3, ...
// Index 0 is 1.
Rational calkin_wilf(std::size_t index);

// The fixed enumeration of Q: 0, then q_1, -q_1, q_2, -q_2, ... over the
// Calkin-Wilf sequence.
Rational dlo_element(std::size_t index);

// Inverse of dlo_element. Throws std::overflow_error when the index does not
// fit in 64 bits (Calkin-Wilf depth above 62).
std::size_t dlo_index(const Rational& r);

// dlo_index(x) < dlo_index(y), without overflow.
bool enumeration_less(const Rational& x, const Rational& y);

// Enumeration-least rational in the open interval (lo, hi); a missing bound is
// infinite. With `avoid_zero` the least nonzero one.
Rational least_in_interval(const std::optional<Rational>& lo, const std::optional<Rational>& hi,
                           bool avoid_zero = false);

}  // namespace canonfn

template <>
struct std::hash<canonfn::Rational> {
  std::size_t operator()(const canonfn::Rational& r) const noexcept {
    return std::hash<std::int64_t>{}(r.num()) * 1000003u ^ std::hash<std::int64_t>{}(r.den());
  }
};
