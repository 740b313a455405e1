#include "canonfn/symbolic_dlo.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "canonfn/errors.hpp"

namespace canonfn {

namespace {

std::optional<std::size_t> safe_index(const Rational& x) {
  try {
    return dlo_index(x);
  } catch (const std::overflow_error&) {
    return std::nullopt;
  }
}

bool inside(const Rational& x, const ComputableDenseSet::Bound& lo, const ComputableDenseSet::Bound& hi) {
  return (!lo || *lo < x) && (!hi || x < *hi);
}

std::optional<Rational> rational_of(const Point& p) {
  if (p.coords.size() != 1 || !p.coords[0].is_rational()) return std::nullopt;
  return p.coords[0].rational();
}

}  // namespace

ComputableDenseSet ComputableDenseSet::rationals() {
  ComputableDenseSet s;
  s.name = "q";
  s.member = [](const Rational&) { return true; };
  s.element = [](std::size_t n) { return dlo_element(n); };
  s.index_of = [](const Rational& x) { return safe_index(x); };
  s.least_in = [](const Bound& lo, const Bound& hi) -> std::optional<Rational> {
    return least_in_interval(lo, hi);
  };
  return s;
}

ComputableDenseSet ComputableDenseSet::rationals_without_zero() {
  ComputableDenseSet s;
  s.name = "q-minus-0";
  s.member = [](const Rational& x) { return x.sign() != 0; };
  s.element = [](std::size_t n) { return dlo_element(n + 1); };
  s.index_of = [](const Rational& x) -> std::optional<std::size_t> {
    if (x.sign() == 0) return std::nullopt;
    auto i = safe_index(x);
    if (!i) return std::nullopt;
    return *i - 1;
  };
  s.least_in = [](const Bound& lo, const Bound& hi) -> std::optional<Rational> {
    return least_in_interval(lo, hi, true);
  };
  return s;
}

ComputableDenseSet ComputableDenseSet::scanned(std::string name, std::function<bool(const Rational&)> member,
                                               std::function<Rational(std::size_t)> element, std::size_t scan) {
  ComputableDenseSet s;
  s.name = std::move(name);
  s.member = member;
  s.element = element;
  s.index_of = [element, scan](const Rational& x) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < scan; ++i)
      if (element(i) == x) return i;
    return std::nullopt;
  };
  s.least_in = [element, scan](const Bound& lo, const Bound& hi) -> std::optional<Rational> {
    for (std::size_t i = 0; i < scan; ++i) {
      Rational x = element(i);
      if (inside(x, lo, hi)) return x;
    }
    return std::nullopt;
  };
  return s;
}

ComputableDenseSet ComputableDenseSet::by_name(const std::string& name) {
  if (name == "q") return rationals();
  if (name == "q-minus-0") return rationals_without_zero();
  throw std::invalid_argument("unknown dense set '" + name + "' (expected q or q-minus-0)");
}

bool ComputableDenseSet::before(const Rational& x, const Rational& y) const {
  auto i = index_of(x), j = index_of(y);
  if (i && j) return *i < *j;
  if (i || j) return i.has_value();
  return enumeration_less(x, y);
}

void probe_density(const ComputableDenseSet& s, std::size_t samples, std::size_t budget) {
  std::vector<Rational> xs;
  for (std::size_t i = 0; i < samples; ++i) {
    Rational x = s.element(i);
    if (!s.member(x)) throw DensityProbeFailure(s.name + ": element " + std::to_string(i) + " is not a member");
    xs.push_back(x);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  if (xs.empty()) throw DensityProbeFailure(s.name + ": no members");

  auto probe = [&](const ComputableDenseSet::Bound& lo, const ComputableDenseSet::Bound& hi,
                   const std::string& what) {
    auto y = s.least_in(lo, hi);
    if (!y || !s.member(*y) || !inside(*y, lo, hi)) throw DensityProbeFailure(s.name + ": no member " + what);
    auto i = s.index_of(*y);
    if (!i || *i >= budget)
      throw DensityProbeFailure(s.name + ": member " + what + " lies beyond " + std::to_string(budget));
  };
  probe(std::nullopt, xs.front(), "below " + xs.front().str());
  probe(xs.back(), std::nullopt, "above " + xs.back().str());
  for (std::size_t i = 0; i + 1 < xs.size(); ++i)
    probe(xs[i], xs[i + 1], "between " + xs[i].str() + " and " + xs[i + 1].str());
}

BackAndForthMap::BackAndForthMap(ComputableDenseSet source, ComputableDenseSet target,
                                 std::vector<std::pair<Rational, Rational>> seeds, std::size_t max_stages)
    : source_(std::move(source)), target_(std::move(target)), max_stages_(max_stages) {
  for (const auto& [x, y] : seeds) {
    if (!source_.member(x) || !target_.member(y))
      throw std::invalid_argument("seed " + x.str() + " -> " + y.str() + " leaves the sets");
    if (forth_.count(x) || back_.count(y)) throw std::invalid_argument("seed point repeated: " + x.str());
    auto above = forth_.upper_bound(x);
    bool ok = (above == forth_.end() || y < above->second) &&
              (above == forth_.begin() || std::prev(above)->second < y);
    if (!ok) throw std::invalid_argument("seeds are not order preserving at " + x.str());
    commit(x, y);
  }
}

void BackAndForthMap::commit(const Rational& x, const Rational& y) {
  forth_.emplace(x, y);
  back_.emplace(y, x);
  log_.emplace_back(x, y);
}

void BackAndForthMap::stage() {
  const bool forth = stages_ % 2 == 0;
  auto& from = forth ? source_ : target_;
  auto& to = forth ? target_ : source_;
  auto& done = forth ? forth_ : back_;
  auto& next = forth ? next_source_ : next_target_;
  while (done.count(from.element(next))) ++next;
  Rational x = from.element(next);
  ComputableDenseSet::Bound lo, hi;
  auto above = done.upper_bound(x);
  if (above != done.end()) hi = above->second;
  if (above != done.begin()) lo = std::prev(above)->second;
  auto y = to.least_in(lo, hi);
  if (!y) throw DensityProbeFailure(to.name + ": no member to match " + x.str());
  if (forth) commit(x, *y);
  else commit(*y, x);
  ++stages_;
}

Rational BackAndForthMap::eval(const Rational& x) {
  std::lock_guard lock(mutex_);
  if (!source_.member(x)) throw DomainGap(x.str() + " is not in " + source_.name);
  for (;;) {
    auto it = forth_.find(x);
    if (it != forth_.end()) return it->second;
    if (stages_ >= max_stages_) throw BudgetExhausted("back-and-forth stage budget exhausted at " + x.str());
    stage();
  }
}

Rational BackAndForthMap::inverse(const Rational& y) {
  std::lock_guard lock(mutex_);
  if (!target_.member(y)) throw DomainGap(y.str() + " is not in " + target_.name);
  for (;;) {
    auto it = back_.find(y);
    if (it != back_.end()) return it->second;
    if (stages_ >= max_stages_) throw BudgetExhausted("back-and-forth stage budget exhausted at " + y.str());
    stage();
  }
}

void BackAndForthMap::run_stages(std::size_t count) {
  std::lock_guard lock(mutex_);
  for (std::size_t i = 0; i < count; ++i) {
    if (stages_ >= max_stages_) throw BudgetExhausted("back-and-forth stage budget exhausted");
    stage();
  }
}

std::size_t BackAndForthMap::stages() const {
  std::lock_guard lock(mutex_);
  return stages_;
}

std::vector<std::pair<Rational, Rational>> BackAndForthMap::commitments() const {
  std::lock_guard lock(mutex_);
  return log_;
}

bool BackAndForthMap::sound() const {
  std::lock_guard lock(mutex_);
  if (forth_.size() != log_.size() || back_.size() != log_.size()) return false;
  std::optional<Rational> prev;
  for (const auto& [x, y] : forth_) {
    if (!source_.member(x) || !target_.member(y)) return false;
    if (prev && !(*prev < y)) return false;
    auto b = back_.find(y);
    if (b == back_.end() || b->second != x) return false;
    prev = y;
  }
  return true;
}

FunctionOracle map_oracle(std::shared_ptr<BackAndForthMap> m, std::string name) {
  return FunctionOracle(std::move(name), [m](const Point& p) -> std::optional<Point> {
    auto x = rational_of(p);
    if (!x || !m->source().member(*x)) return std::nullopt;
    return rational_point(m->eval(*x));
  });
}

FunctionOracle inverse_map_oracle(std::shared_ptr<BackAndForthMap> m, std::string name) {
  return FunctionOracle(std::move(name), [m](const Point& p) -> std::optional<Point> {
    auto y = rational_of(p);
    if (!y || !m->target().member(*y)) return std::nullopt;
    return rational_point(m->inverse(*y));
  });
}

std::shared_ptr<BackAndForthMap> canonical_iso(const ComputableDenseSet& source, const ComputableDenseSet& target) {
  probe_density(source);
  probe_density(target);
  return std::make_shared<BackAndForthMap>(source, target);
}

std::shared_ptr<BackAndForthMap> automorphism_moving(const Rational& a, const Rational& b) {
  auto q = ComputableDenseSet::rationals();
  return std::make_shared<BackAndForthMap>(q, q, std::vector<std::pair<Rational, Rational>>{{a, b}});
}

std::optional<CutBracket> forced_cut(const FunctionOracle& f, const FunctionOracle& g, const Rational& cut,
                                     const Rational& epsilon, std::size_t budget) {
  std::optional<CutBracket> best;
  std::optional<Rational> lo, hi, x_lo, x_hi;
  for (std::size_t i = 0; i < budget; ++i) {
    Rational x = dlo_element(i);
    Rational fx = f(rational_point(x)).coords[0].rational();
    if (fx == cut) continue;
    Rational gx = g(rational_point(x)).coords[0].rational();
    if (fx < cut && (!lo || *lo < gx)) {
      lo = gx;
      x_lo = x;
    }
    if (cut < fx && (!hi || gx < *hi)) {
      hi = gx;
      x_hi = x;
    }
    if (lo && hi && *hi - *lo < epsilon) return CutBracket{*lo, *hi, *x_lo, *x_hi, i + 1};
  }
  return std::nullopt;
}

namespace {

struct PhamMaps {
  std::shared_ptr<BackAndForthMap> f, alpha;

  Rational fv(const Rational& x) const { return f->eval(x); }
  Rational fa(const Rational& x) const { return f->eval(alpha->eval(x)); }
};

std::shared_ptr<BackAndForthMap> pham_f() {
  return canonical_iso(ComputableDenseSet::rationals(), ComputableDenseSet::rationals_without_zero());
}

template <class Pred>
Rational first_probe(Pred pred, std::size_t budget, const std::string& what) {
  for (std::size_t i = 0; i < budget; ++i)
    if (pred(dlo_element(i))) return dlo_element(i);
  throw BudgetExhausted("no probe " + what + " among the first " + std::to_string(budget));
}

}  // namespace

ObstructionCertificate pham_refute(const Rational& epsilon, std::size_t budget) {
  if (epsilon.sign() <= 0) throw std::invalid_argument("epsilon must be positive");
  PhamMaps m;
  m.f = pham_f();
  ObstructionCertificate c;
  c.epsilon = epsilon;
  c.a = first_probe([&](const Rational& x) { return m.fv(x).sign() < 0; }, budget, "with f(x) < 0");
  Rational b = first_probe([&](const Rational& x) { return m.fv(x).sign() > 0; }, budget, "with f(x) > 0");
  m.alpha = automorphism_moving(c.a, b);
  c.alpha_a = b;
  c.f_a = m.fv(c.a);
  c.f_alpha_a = m.fv(b);
  if (!(epsilon < -c.f_a && epsilon < c.f_alpha_a))
    throw std::invalid_argument("epsilon " + epsilon.str() + " is not below min(-f(a), f(alpha(a))) = " +
                                std::min(-c.f_a, c.f_alpha_a).str());

  auto f = map_oracle(m.f, "pham");
  auto fa = FunctionOracle::compose(f, map_oracle(m.alpha, "alpha"));
  auto cut = forced_cut(f, fa, Rational(0), epsilon, budget);
  if (!cut) throw BudgetExhausted("cut bracket wider than epsilon after " + std::to_string(budget) + " probes");
  c.cut = *cut;
  c.f_cut_lo = m.fv(cut->x_lo);
  c.f_cut_hi = m.fv(cut->x_hi);

  // Values of f o alpha this close to 0 sit far down the enumeration, so
  // the witnesses are pulled back from the least targets on each side.
  auto pull_back = [&](const Rational& t) { return m.alpha->inverse(m.f->inverse(t)); };
  c.x1 = pull_back(least_in_interval(-epsilon, Rational(0), true));
  c.x2 = pull_back(least_in_interval(Rational(0), epsilon, true));
  c.y1 = m.fv(c.x1);
  c.e_y1 = m.fa(c.x1);
  c.y2 = m.fv(c.x2);
  c.e_y2 = m.fa(c.x2);
  return c;
}

bool CertificateCheck::ok() const {
  return std::all_of(claims.begin(), claims.end(), [](const auto& c) { return c.second; });
}

CertificateCheck check_certificate(const ObstructionCertificate& c) {
  CertificateCheck r;
  auto claim = [&](std::string name, bool holds) { r.claims.emplace_back(std::move(name), holds); };
  PhamMaps m;
  m.f = pham_f();
  m.alpha = automorphism_moving(c.a, c.alpha_a);
  const Rational& eps = c.epsilon;

  claim("epsilon > 0", eps.sign() > 0);
  claim("f(a) recomputed", m.fv(c.a) == c.f_a);
  claim("f(alpha(a)) recomputed", m.fa(c.a) == c.f_alpha_a);
  claim("f(a) < 0", c.f_a.sign() < 0);
  claim("f(alpha(a)) > 0", c.f_alpha_a.sign() > 0);
  claim("epsilon < -f(a)", eps < -c.f_a);
  claim("epsilon < f(alpha(a))", eps < c.f_alpha_a);

  claim("f(x_lo) recomputed", m.fv(c.cut.x_lo) == c.f_cut_lo);
  claim("f(x_hi) recomputed", m.fv(c.cut.x_hi) == c.f_cut_hi);
  claim("lo recomputed", m.fa(c.cut.x_lo) == c.cut.lo);
  claim("hi recomputed", m.fa(c.cut.x_hi) == c.cut.hi);
  claim("f(x_lo) < 0", c.f_cut_lo.sign() < 0);
  claim("f(x_hi) > 0", c.f_cut_hi.sign() > 0);
  claim("f(a) <= f(x_lo)", c.f_a <= c.f_cut_lo);
  claim("lo >= f(alpha(a))", c.f_alpha_a <= c.cut.lo);
  claim("lo < hi", c.cut.lo < c.cut.hi);
  claim("hi - lo < epsilon", c.cut.hi - c.cut.lo < eps);
  claim("lo > epsilon", eps < c.cut.lo);

  claim("y1 = f(x1)", m.fv(c.x1) == c.y1);
  claim("e(y1) = f(alpha(x1))", m.fa(c.x1) == c.e_y1);
  claim("e(y1) in (-epsilon, 0)", -eps < c.e_y1 && c.e_y1.sign() < 0);
  claim("y2 = f(x2)", m.fv(c.x2) == c.y2);
  claim("e(y2) = f(alpha(x2))", m.fa(c.x2) == c.e_y2);
  claim("e(y2) in (0, epsilon)", c.e_y2.sign() > 0 && c.e_y2 < eps);
  return r;
}

namespace {

const char* const kCertificateKeys[] = {"epsilon", "a",      "alpha_a",    "f_a",      "f_alpha_a", "cut_lo",
                                        "cut_hi",  "cut_x_lo", "cut_x_hi", "cut_probes", "f_cut_lo", "f_cut_hi",
                                        "x1",      "y1",     "e_y1",       "x2",       "y2",        "e_y2"};

}  // namespace

std::string certificate_str(const ObstructionCertificate& c) {
  std::ostringstream out;
  out << "epsilon: " << c.epsilon << "\n";
  out << "a: " << c.a << "\n";
  out << "alpha_a: " << c.alpha_a << "\n";
  out << "f_a: " << c.f_a << "\n";
  out << "f_alpha_a: " << c.f_alpha_a << "\n";
  out << "cut_lo: " << c.cut.lo << "\n";
  out << "cut_hi: " << c.cut.hi << "\n";
  out << "cut_x_lo: " << c.cut.x_lo << "\n";
  out << "cut_x_hi: " << c.cut.x_hi << "\n";
  out << "cut_probes: " << c.cut.probes << "\n";
  out << "f_cut_lo: " << c.f_cut_lo << "\n";
  out << "f_cut_hi: " << c.f_cut_hi << "\n";
  out << "x1: " << c.x1 << "\n";
  out << "y1: " << c.y1 << "\n";
  out << "e_y1: " << c.e_y1 << "\n";
  out << "x2: " << c.x2 << "\n";
  out << "y2: " << c.y2 << "\n";
  out << "e_y2: " << c.e_y2 << "\n";
  return out.str();
}

ObstructionCertificate parse_certificate(const std::string& text) {
  std::map<std::string, std::pair<std::string, std::size_t>> values;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  const std::set<std::string> known(std::begin(kCertificateKeys), std::end(kCertificateKeys));
  while (std::getline(in, line)) {
    ++number;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto colon = line.find(':');
    if (colon == std::string::npos) throw FormatError(number, "expected 'key: value'");
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, colon));
    if (!known.count(key)) throw FormatError(number, "unknown key '" + key + "'");
    if (values.count(key)) throw FormatError(number, "duplicate key '" + key + "'");
    values[key] = {trim(line.substr(colon + 1)), number};
  }
  auto get = [&](const std::string& key) -> Rational {
    auto it = values.find(key);
    if (it == values.end()) throw FormatError(number, "missing key '" + key + "'");
    try {
      return Rational::parse(it->second.first);
    } catch (const std::exception&) {
      throw FormatError(it->second.second, "bad rational '" + it->second.first + "'");
    }
  };
  ObstructionCertificate c;
  c.epsilon = get("epsilon");
  c.a = get("a");
  c.alpha_a = get("alpha_a");
  c.f_a = get("f_a");
  c.f_alpha_a = get("f_alpha_a");
  c.cut.lo = get("cut_lo");
  c.cut.hi = get("cut_hi");
  c.cut.x_lo = get("cut_x_lo");
  c.cut.x_hi = get("cut_x_hi");
  Rational probes = get("cut_probes");
  if (!probes.is_integer() || probes.sign() < 0)
    throw FormatError(values["cut_probes"].second, "cut_probes must be a nonnegative integer");
  c.cut.probes = static_cast<std::size_t>(probes.num());
  c.f_cut_lo = get("f_cut_lo");
  c.f_cut_hi = get("f_cut_hi");
  c.x1 = get("x1");
  c.y1 = get("y1");
  c.e_y1 = get("e_y1");
  c.x2 = get("x2");
  c.y2 = get("y2");
  c.e_y2 = get("e_y2");
  return c;
}

}  // namespace canonfn
