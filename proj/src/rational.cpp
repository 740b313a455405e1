#include "canonfn/rational.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace canonfn {

namespace {

__int128 gcd_wide(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

bool fits(__int128 v) {
  return v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max();
}

}  // namespace

Rational::Rational(std::int64_t n, std::int64_t d) {
  *this = from_wide(n, d);
}

Rational Rational::from_wide(__int128 n, __int128 d) {
  if (d == 0) throw std::domain_error("rational with zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  __int128 g = gcd_wide(n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  if (!fits(n) || !fits(d)) throw std::overflow_error("rational overflow");
  Rational r;
  r.num_ = static_cast<std::int64_t>(n);
  r.den_ = static_cast<std::int64_t>(d);
  return r;
}

Rational Rational::operator-() const { return from_wide(-static_cast<__int128>(num_), den_); }

Rational Rational::operator+(const Rational& o) const {
  return from_wide(static_cast<__int128>(num_) * o.den_ + static_cast<__int128>(o.num_) * den_,
                   static_cast<__int128>(den_) * o.den_);
}

Rational Rational::operator-(const Rational& o) const { return *this + (-o); }

Rational Rational::operator*(const Rational& o) const {
  return from_wide(static_cast<__int128>(num_) * o.num_, static_cast<__int128>(den_) * o.den_);
}

Rational Rational::operator/(const Rational& o) const {
  if (o.num_ == 0) throw std::domain_error("division by zero");
  return from_wide(static_cast<__int128>(num_) * o.den_, static_cast<__int128>(den_) * o.num_);
}

std::strong_ordering Rational::operator<=>(const Rational& o) const {
  __int128 lhs = static_cast<__int128>(num_) * o.den_;
  __int128 rhs = static_cast<__int128>(o.num_) * den_;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::parse(std::string_view text) {
  auto parse_int = [&](std::string_view part) {
    std::int64_t v = 0;
    if (part.empty()) throw std::invalid_argument("bad rational literal '" + std::string(text) + "'");
    auto first = part.data();
    auto last = part.data() + part.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) throw std::invalid_argument("bad rational literal '" + std::string(text) + "'");
    return v;
  };
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_int(text));
  std::int64_t d = parse_int(text.substr(slash + 1));
  if (d == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
  return Rational(parse_int(text.substr(0, slash)), d);
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

Rational calkin_wilf(std::size_t index) {
  // Walk the Calkin-Wilf tree along the binary digits of index+1 below the
  // leading one: 0 -> a/(a+b), 1 -> (a+b)/b.
  std::size_t n = index + 1;
  int top = std::numeric_limits<std::size_t>::digits - 1;
  while (((n >> top) & 1u) == 0) --top;
  std::int64_t a = 1, b = 1;
  for (int bit = top - 1; bit >= 0; --bit) {
    if ((n >> bit) & 1u)
      a += b;
    else
      b += a;
  }
  return Rational(a, b);
}

Rational dlo_element(std::size_t index) {
  if (index == 0) return Rational(0);
  Rational q = calkin_wilf((index - 1) / 2);
  return (index % 2 == 1) ? q : -q;
}

namespace {

// Path from the Calkin-Wilf root to a positive rational as runs of equal
// steps, root first.
struct CwPath {
  __int128 depth = 0;
  std::vector<std::pair<bool, std::int64_t>> runs;
};

CwPath cw_path(const Rational& r) {
  std::int64_t a = r.num(), b = r.den();
  CwPath p;
  while (!(a == 1 && b == 1)) {
    if (a > b) {
      std::int64_t k = (b == 1) ? a - 1 : a / b;
      a -= k * b;
      p.runs.emplace_back(true, k);
      p.depth += k;
    } else {
      std::int64_t k = (a == 1) ? b - 1 : b / a;
      b -= k * a;
      p.runs.emplace_back(false, k);
      p.depth += k;
    }
  }
  std::reverse(p.runs.begin(), p.runs.end());
  return p;
}

// Same-depth paths compare as bit strings (false < true).
bool path_less(const CwPath& x, const CwPath& y) {
  if (x.depth != y.depth) return x.depth < y.depth;
  std::size_t i = 0, j = 0;
  std::int64_t used_x = 0, used_y = 0;
  while (i < x.runs.size() && j < y.runs.size()) {
    if (x.runs[i].first != y.runs[j].first) return !x.runs[i].first;
    const std::int64_t left_x = x.runs[i].second - used_x, left_y = y.runs[j].second - used_y;
    const std::int64_t step = std::min(left_x, left_y);
    used_x += step;
    used_y += step;
    if (used_x == x.runs[i].second) ++i, used_x = 0;
    if (used_y == y.runs[j].second) ++j, used_y = 0;
  }
  return false;
}

// Stern-Brocot simplest rational in (lo, hi) for 0 <= lo; hi may be infinite.
Rational simplest_between(const Rational& lo, const std::optional<Rational>& hi) {
  const std::int64_t fl = lo.num() >= 0 ? lo.num() / lo.den() : -((-lo.num() + lo.den() - 1) / lo.den());
  const Rational next(fl + 1);
  if (!hi || next < *hi) return next;
  const Rational n(fl);
  // No integer strictly inside: recurse on the reciprocal of the fractional
  // parts (the lower end at n itself maps to infinity).
  std::optional<Rational> upper;
  if (lo != n) upper = Rational(1) / (lo - n);
  return n + Rational(1) / simplest_between(Rational(1) / (*hi - n), upper);
}

}  // namespace

std::size_t dlo_index(const Rational& r) {
  if (r.sign() == 0) return 0;
  const CwPath p = cw_path(r.abs());
  if (p.depth > 62) throw std::overflow_error("enumeration index of " + r.str() + " exceeds 64 bits");
  std::size_t n = 1;
  for (const auto& [bit, len] : p.runs)
    for (std::int64_t i = 0; i < len; ++i) n = (n << 1) | (bit ? 1u : 0u);
  std::size_t cw = n - 1;
  return r.sign() > 0 ? 2 * cw + 1 : 2 * cw + 2;
}

bool enumeration_less(const Rational& x, const Rational& y) {
  if (x == y) return false;
  if (x.sign() == 0) return true;
  if (y.sign() == 0) return false;
  const CwPath px = cw_path(x.abs()), py = cw_path(y.abs());
  if (path_less(px, py)) return true;
  if (path_less(py, px)) return false;
  return x.sign() > 0;  // q before -q
}

Rational least_in_interval(const std::optional<Rational>& lo, const std::optional<Rational>& hi, bool avoid_zero) {
  if (lo && hi && !(*lo < *hi)) throw std::invalid_argument("empty interval");
  const bool below = !lo || lo->sign() < 0;
  const bool above = !hi || hi->sign() > 0;
  if (below && above) {
    if (!avoid_zero) return Rational(0);
    Rational pos = simplest_between(Rational(0), hi);
    Rational neg = -simplest_between(Rational(0), lo ? std::optional<Rational>(-*lo) : std::nullopt);
    return enumeration_less(pos, neg) ? pos : neg;
  }
  if (!below) return simplest_between(*lo, hi);
  return -simplest_between(-*hi, lo ? std::optional<Rational>(-*lo) : std::nullopt);
}

}  // namespace canonfn
