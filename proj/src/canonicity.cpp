#include "canonfn/canonicity.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <mutex>
#include <sstream>

#include "canonfn/errors.hpp"

namespace canonfn {

// ------------------------------------------------------------- AffinePiece

bool AffinePiece::contains(const Rational& x) const {
  if (lo && (x < *lo || (x == *lo && !lo_closed))) return false;
  if (hi && (*hi < x || (x == *hi && !hi_closed))) return false;
  return true;
}

namespace {

std::string affine_str(const Rational& slope, const Rational& offset) {
  if (slope.sign() == 0) return offset.str();
  std::string out = slope == Rational(1) ? "x" : "x*" + slope.str();
  if (offset.sign() > 0) out += "+" + offset.str();
  if (offset.sign() < 0) out += "-" + (-offset).str();
  return out;
}

}  // namespace

std::string AffinePiece::str() const {
  std::string out = lo_closed ? "[" : "(";
  out += lo ? lo->str() : "-inf";
  out += ",";
  out += hi ? hi->str() : "inf";
  out += hi_closed ? "]" : ")";
  return out + ":" + affine_str(slope, offset);
}

// ----------------------------------------------------------- FunctionOracle

Point FunctionOracle::operator()(const Point& x) const {
  auto y = eval_(x);
  if (!y) throw DomainGap(name_ + " is undefined at " + x.str());
  return *y;
}

std::vector<Point> FunctionOracle::apply(std::span<const Point> xs) const {
  std::vector<Point> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back((*this)(x));
  return out;
}

namespace {

std::optional<Rational> single_rational(const Point& p) {
  if (p.coords.size() != 1 || !p.coords[0].is_rational()) return std::nullopt;
  return p.coords[0].rational();
}

}  // namespace

FunctionOracle FunctionOracle::table(std::vector<std::pair<Point, Point>> pairs, std::string name) {
  auto map = std::make_shared<std::map<Point, Point>>();
  for (auto& [x, y] : pairs) {
    auto [it, fresh] = map->emplace(x, y);
    if (!fresh && it->second != y) throw std::invalid_argument("table is not functional at " + x.str());
  }
  return FunctionOracle(std::move(name), [map](const Point& x) -> std::optional<Point> {
    auto it = map->find(x);
    if (it == map->end()) return std::nullopt;
    return it->second;
  });
}

FunctionOracle FunctionOracle::identity() {
  return FunctionOracle("id", [](const Point& x) { return std::optional<Point>(x); });
}

FunctionOracle FunctionOracle::negation() {
  return FunctionOracle("neg", [](const Point& x) -> std::optional<Point> {
    auto r = single_rational(x);
    if (!r) return std::nullopt;
    return rational_point(-*r);
  });
}

FunctionOracle FunctionOracle::constant(const Rational& c) {
  return FunctionOracle("const:" + c.str(), [c](const Point&) { return std::optional<Point>(rational_point(c)); });
}

FunctionOracle FunctionOracle::pieces(std::vector<AffinePiece> pieces) {
  auto lower_less = [](const AffinePiece& a, const AffinePiece& b) {
    if (!a.lo || !b.lo) return !a.lo && b.lo;
    if (*a.lo != *b.lo) return *a.lo < *b.lo;
    return a.lo_closed && !b.lo_closed;
  };
  std::sort(pieces.begin(), pieces.end(), lower_less);
  if (pieces.empty()) throw std::invalid_argument("no pieces");
  for (const auto& p : pieces) {
    if ((!p.lo && p.lo_closed) || (!p.hi && p.hi_closed)) throw std::invalid_argument("infinite endpoints are open");
    if (p.lo && p.hi && (*p.hi < *p.lo || (*p.hi == *p.lo && !(p.lo_closed && p.hi_closed))))
      throw std::invalid_argument("empty piece " + p.str());
  }
  if (pieces.front().lo) throw std::invalid_argument("pieces do not cover the negative end");
  if (pieces.back().hi) throw std::invalid_argument("pieces do not cover the positive end");
  for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
    const auto& a = pieces[i];
    const auto& b = pieces[i + 1];
    if (!a.hi || !b.lo || *a.hi != *b.lo)
      throw std::invalid_argument("pieces " + a.str() + " and " + b.str() + " leave a gap or overlap");
    if (a.hi_closed == b.lo_closed)
      throw std::invalid_argument("pieces " + a.str() + " and " + b.str() + " overlap or miss their common endpoint");
  }
  std::string name = "pieces:[";
  for (std::size_t i = 0; i < pieces.size(); ++i) name += (i ? "; " : "") + pieces[i].str();
  name += "]";
  auto shared = std::make_shared<std::vector<AffinePiece>>(std::move(pieces));
  return FunctionOracle(name, [shared](const Point& x) -> std::optional<Point> {
    auto r = single_rational(x);
    if (!r) return std::nullopt;
    for (const auto& p : *shared)
      if (p.contains(*r)) return rational_point(p.apply(*r));
    return std::nullopt;
  });
}

FunctionOracle FunctionOracle::compose(const FunctionOracle& outer, const FunctionOracle& inner) {
  return FunctionOracle("compose(" + outer.name() + "," + inner.name() + ")",
                        [outer, inner](const Point& x) -> std::optional<Point> {
                          auto y = inner.try_eval(x);
                          if (!y) return std::nullopt;
                          return outer.try_eval(*y);
                        });
}

FunctionOracle FunctionOracle::minimum(int m) {
  return FunctionOracle("min", [m](const Point& x) -> std::optional<Point> {
    if (static_cast<int>(x.coords.size()) != m) return std::nullopt;
    std::optional<Rational> best;
    for (const auto& c : x.coords) {
      if (!c.is_rational()) return std::nullopt;
      if (!best || c.rational() < *best) best = c.rational();
    }
    return rational_point(*best);
  });
}

FunctionOracle FunctionOracle::projection(int i, int m) {
  return FunctionOracle("proj:" + std::to_string(i + 1), [i, m](const Point& x) -> std::optional<Point> {
    if (static_cast<int>(x.coords.size()) != m) return std::nullopt;
    return Point(x.coords[i]);
  });
}

FunctionOracle FunctionOracle::partial_automorphism(std::shared_ptr<PartialAutomorphism> a) {
  auto mutex = std::make_shared<std::mutex>();
  return FunctionOracle("alpha", [a, mutex](const Point& x) -> std::optional<Point> {
    if (x.coords.size() != 1) return std::nullopt;
    std::lock_guard lock(*mutex);
    return Point(a->extend(x.coords[0]));
  });
}

// ------------------------------------------------------------------ parsing

namespace {

class ExprParser {
public:
  explicit ExprParser(std::string text) : text_(std::move(text)) {}

  std::pair<Rational, Rational> parse() {
    auto v = expr();
    skip();
    if (pos_ != text_.size()) fail("end of expression");
    return v;
  }

private:
  using Linear = std::pair<Rational, Rational>;  // slope, offset

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& expected) {
    throw UsageError(pos_, pos_ < text_.size() ? text_.substr(pos_, 1) : "<end>", expected);
  }

  Linear expr() {
    Linear v = term();
    while (true) {
      if (accept('+')) {
        auto t = term();
        v = {v.first + t.first, v.second + t.second};
      } else if (accept('-')) {
        auto t = term();
        v = {v.first - t.first, v.second - t.second};
      } else {
        return v;
      }
    }
  }
  Linear term() {
    Linear v = factor();
    while (accept('*')) {
      Linear f = factor();
      if (v.first.sign() != 0 && f.first.sign() != 0) fail("a linear expression");
      v = {v.first * f.second + f.first * v.second, v.second * f.second};
    }
    return v;
  }
  Linear factor() {
    if (accept('-')) {
      auto f = factor();
      return {-f.first, -f.second};
    }
    if (accept('x')) return {Rational(1), Rational(0)};
    if (accept('(')) {
      auto v = expr();
      if (!accept(')')) fail("')'");
      return v;
    }
    skip();
    std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '/')) ++pos_;
    if (start == pos_) fail("x or a rational");
    try {
      return {Rational(0), Rational::parse(text_.substr(start, pos_ - start))};
    } catch (const std::exception&) {
      pos_ = start;
      fail("a rational literal");
    }
  }

  std::string text_;
  std::size_t pos_ = 0;
};

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  auto z = s.find_last_not_of(" \t\r\n");
  return s.substr(a, z - a + 1);
}

std::optional<Rational> parse_bound(const std::string& text, std::size_t offset) {
  auto t = trim(text);
  if (t == "inf" || t == "+inf" || t == "-inf") return std::nullopt;
  try {
    return Rational::parse(t);
  } catch (const std::exception&) {
    throw UsageError(offset, t, "a rational or inf");
  }
}

}  // namespace

std::pair<Rational, Rational> parse_affine(const std::string& text) { return ExprParser(text).parse(); }

std::vector<AffinePiece> parse_pieces(const std::string& text) {
  auto t = trim(text);
  if (t.empty() || t.front() != '[') throw UsageError(0, t.substr(0, 1), "'['");
  if (t.back() != ']' || t.size() < 2) throw UsageError(t.size(), "<end>", "']' closing the piece list");
  const std::string body = t.substr(1, t.size() - 2);
  std::vector<AffinePiece> out;
  std::size_t start = 0;
  while (start <= body.size()) {
    auto end = body.find(';', start);
    if (end == std::string::npos) end = body.size();
    const std::string piece = trim(body.substr(start, end - start));
    const std::size_t at = start + 1;
    if (piece.size() < 5) throw UsageError(at, piece, "an interval and an expression");
    AffinePiece p;
    if (piece[0] != '(' && piece[0] != '[') throw UsageError(at, piece.substr(0, 1), "'(' or '['");
    p.lo_closed = piece[0] == '[';
    auto close = piece.find_first_of(")]");
    auto comma = piece.find(',');
    if (close == std::string::npos || comma == std::string::npos || comma > close)
      throw UsageError(at, piece, "an interval '(lo,hi)'");
    p.hi_closed = piece[close] == ']';
    p.lo = parse_bound(piece.substr(1, comma - 1), at);
    p.hi = parse_bound(piece.substr(comma + 1, close - comma - 1), at);
    auto colon = piece.find(':', close);
    if (colon == std::string::npos) throw UsageError(at + close, piece.substr(close), "':' before the expression");
    try {
      std::tie(p.slope, p.offset) = parse_affine(piece.substr(colon + 1));
    } catch (const UsageError& e) {
      throw UsageError(at + colon + 1 + e.position(), piece.substr(colon + 1), "an affine expression in x");
    }
    out.push_back(p);
    start = end + 1;
  }
  return out;
}

FunctionOracle parse_function_table(const std::string& text, const GroupPresentation& source,
                                    const GroupPresentation& target) {
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  std::vector<std::pair<Point, Point>> pairs;
  std::map<Point, std::size_t> seen;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    auto arrow = line.find("->");
    if (arrow == std::string::npos) throw FormatError(line_no, "expected 'x -> y'");
    Point x, y;
    try {
      x = parse_point(source, trim(line.substr(0, arrow)));
      y = parse_point(target, trim(line.substr(arrow + 2)));
    } catch (const std::exception& e) {
      throw FormatError(line_no, e.what());
    }
    if (seen.count(x)) throw FormatError(line_no, "second entry for " + x.str());
    seen[x] = line_no;
    pairs.emplace_back(std::move(x), std::move(y));
  }
  return FunctionOracle::table(std::move(pairs));
}

std::string function_table_str(const std::vector<std::pair<Point, Point>>& pairs) {
  std::string out;
  for (const auto& [x, y] : pairs) out += x.str() + " -> " + y.str() + "\n";
  return out;
}

// --------------------------------------------------------------- canonicity

namespace {

std::vector<Point> pick(const std::vector<Point>& pts, const std::vector<int>& idx) {
  std::vector<Point> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(pts[i]);
  return out;
}

// Index tuples of arity 1..k over n points, ordered by (arity, tuple).
std::vector<std::vector<int>> all_tuples(std::size_t n, int k) {
  std::vector<std::vector<int>> out;
  for (int a = 1; a <= k; ++a)
    for (auto& t : index_maps(a, static_cast<int>(n))) out.push_back(std::move(t));
  return out;
}

std::string tuple_str(const std::vector<Point>& t) {
  std::string out;
  for (std::size_t i = 0; i < t.size(); ++i) out += (i ? " " : "") + t[i].str();
  return out;
}

}  // namespace

CanonicityVerdict check_canonical(const FunctionOracle& f, const GroupPresentation& g, const GroupPresentation& h,
                                  const std::vector<Point>& domain, int k) {
  require_arity(k);
  const auto images = f.apply(domain);
  BehaviorTable seen(g, h, k);
  std::map<OrbitLabel, std::vector<int>> first;
  for (const auto& idx : all_tuples(domain.size(), k)) {
    const auto src = g.label(pick(domain, idx));
    const auto img = h.label(pick(images, idx));
    auto& bucket = seen.maps[idx.size() - 1];
    auto it = bucket.find(src);
    if (it == bucket.end()) {
      bucket.emplace(src, img);
      first.emplace(src, idx);
      continue;
    }
    if (it->second != img) {
      const auto& s = first.at(src);
      return Counterexample{pick(domain, s), pick(domain, idx), src, it->second, img};
    }
  }
  return CanonicalUpTo{domain.size(), k, std::move(seen)};
}

CanonicityVerdict check_canonical(const FunctionOracle& f, const GroupPresentation& g, const GroupPresentation& h,
                                  std::size_t n, int k) {
  std::vector<Point> domain;
  for (std::size_t i = 0; i < n; ++i) domain.push_back(g.point(i));
  return check_canonical(f, g, h, domain, k);
}

bool verify_counterexample(const FunctionOracle& f, const GroupPresentation& g, const GroupPresentation& h,
                           const Counterexample& c) {
  if (c.s.size() != c.t.size()) return false;
  if (g.label(c.s) != c.source_label || g.label(c.t) != c.source_label) return false;
  const auto fs = f.apply(c.s), ft = f.apply(c.t);
  return h.label(fs) == c.image_label_s && h.label(ft) == c.image_label_t && !h.same_orbit(fs, ft);
}

BehaviorTable behavior_of(const FunctionOracle& f, const GroupPresentation& g, const GroupPresentation& h,
                          std::size_t n, int k) {
  auto v = check_canonical(f, g, h, n, k);
  if (auto* c = std::get_if<Counterexample>(&v))
    throw NotCanonical(f.name() + " is not canonical: (" + tuple_str(c->s) + ") and (" + tuple_str(c->t) +
                       ") share the label " + g.label_str(c->source_label) + " but map to " +
                       h.label_str(c->image_label_s) + " and " + h.label_str(c->image_label_t));
  return std::get<CanonicalUpTo>(v).behavior;
}

std::string verdict_str(const CanonicityVerdict& v, const GroupPresentation& g, const GroupPresentation& h) {
  std::ostringstream out;
  if (const auto* ok = std::get_if<CanonicalUpTo>(&v)) {
    out << "verdict: canonical-up-to\n";
    out << "horizon: " << ok->horizon << "\n";
    out << behavior_str(ok->behavior);
  } else {
    const auto& c = std::get<Counterexample>(v);
    out << "verdict: counterexample\n";
    out << "source_label: " << g.label_str(c.source_label) << "\n";
    out << "witness_s: " << tuple_str(c.s) << "\n";
    out << "witness_t: " << tuple_str(c.t) << "\n";
    out << "image_label_s: " << h.label_str(c.image_label_s) << "\n";
    out << "image_label_t: " << h.label_str(c.image_label_t) << "\n";
  }
  return out.str();
}

bool local_equal(const FunctionOracle& f, const FunctionOracle& g, const std::vector<Point>& points,
                 const GroupPresentation& h) {
  return h.label(f.apply(points)) == h.label(g.apply(points));
}

// -------------------------------------------------------------------- towers

TowerResult tower_witness(const std::vector<std::pair<FunctionOracle, FunctionOracle>>& pairs,
                          const GroupPresentation& h, const std::vector<Point>& domain) {
  TowerWitness w;
  w.pairs = pairs.size();
  std::vector<std::vector<Point>> fimg(pairs.size()), gimg(pairs.size());
  for (std::size_t l = 1; l <= domain.size(); ++l) {
    const Point& x = domain[l - 1];
    TowerLevel level;
    level.points.assign(domain.begin(), domain.begin() + l);
    std::vector<Point> joint;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      fimg[i].push_back(pairs[i].first(x));
      gimg[i].push_back(pairs[i].second(x));
      auto fl = h.label(fimg[i]);
      auto gl = h.label(gimg[i]);
      if (fl != gl) return LocalFailure{i, level.points};
      level.blocks.push_back(std::move(gl));
      joint.insert(joint.end(), fimg[i].begin(), fimg[i].end());
    }
    level.joint = h.label(joint);
    w.levels.push_back(std::move(level));
  }
  return w;
}

TowerResult tower_witness(const std::vector<std::pair<FunctionOracle, FunctionOracle>>& pairs,
                          const GroupPresentation& h, const GroupPresentation& g, std::size_t depth) {
  std::vector<Point> domain;
  for (std::size_t i = 0; i < depth; ++i) domain.push_back(g.point(i));
  return tower_witness(pairs, h, domain);
}

bool check_tower(const TowerWitness& w, const GroupPresentation& h) {
  const int n = static_cast<int>(w.pairs);
  for (std::size_t l = 0; l < w.levels.size(); ++l) {
    const auto& level = w.levels[l];
    const int p = static_cast<int>(level.points.size());
    if (p != static_cast<int>(l) + 1 || static_cast<int>(level.blocks.size()) != n) return false;
    if (h.label_arity(level.joint) != n * p) return false;
    for (int i = 0; i < n; ++i) {
      std::vector<int> block(p);
      for (int j = 0; j < p; ++j) block[j] = i * p + j;
      if (h.reindex(level.joint, block) != level.blocks[i]) return false;
    }
    if (l == 0) continue;
    const auto& prev = w.levels[l - 1];
    std::vector<int> restrict_joint;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p - 1; ++j) restrict_joint.push_back(i * p + j);
    if (h.reindex(level.joint, restrict_joint) != prev.joint) return false;
    std::vector<int> prefix(p - 1);
    for (int j = 0; j < p - 1; ++j) prefix[j] = j;
    for (int i = 0; i < n; ++i)
      if (h.reindex(level.blocks[i], prefix) != prev.blocks[i]) return false;
    if (!std::equal(prev.points.begin(), prev.points.end(), level.points.begin())) return false;
  }
  return true;
}

// ------------------------------------------------------------------ harness

HarnessReport proposition_harness(const FunctionOracle& f, const GroupPresentation& g, const GroupPresentation& h,
                                  std::size_t n, int k) {
  std::vector<Point> domain;
  for (std::size_t i = 0; i < n; ++i) domain.push_back(g.point(i));
  HarnessReport report{check_canonical(f, g, h, domain, k), true, true, {}, std::nullopt, true, true, {}};

  std::map<OrbitLabel, std::vector<int>> first;
  for (const auto& idx : all_tuples(n, k)) {
    auto src = g.label(pick(domain, idx));
    auto [it, fresh] = first.emplace(src, idx);
    if (fresh) continue;
    HarnessSample sample{pick(domain, it->second), pick(domain, idx), {}, true, TowerWitness{}};
    // Support: distinct points of s in domain order, with alpha's values.
    std::vector<int> sorted(it->second);
    std::vector<std::pair<Point, Point>> alpha;
    std::vector<int> order(sorted.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return sorted[a] < sorted[b]; });
    for (int pos : order) {
      if (!alpha.empty() && alpha.back().first == sample.s[pos]) continue;
      alpha.emplace_back(sample.s[pos], sample.t[pos]);
      sample.support.push_back(sample.s[pos]);
    }
    if (g.kind() == GroupPresentation::Kind::AutLimit) {
      std::vector<std::pair<Element, Element>> germ;
      for (const auto& [x, y] : alpha) germ.emplace_back(x.coords[0], y.coords[0]);
      automorphism_extending(g, germ);  // throws TypeMismatch if the seed is not an orbit pair
    }
    std::vector<std::pair<Point, Point>> composed;
    for (const auto& [x, y] : alpha) composed.emplace_back(x, f(y));
    auto f_alpha = FunctionOracle::table(composed, "f*alpha");
    sample.local_ok = local_equal(f_alpha, f, sample.support, h);
    sample.tower = tower_witness({{f_alpha, f}}, h, sample.support);
    report.samples.push_back(std::move(sample));
  }

  for (std::size_t i = 0; i < report.samples.size(); ++i) {
    const auto& s = report.samples[i];
    const bool tower_ok = std::holds_alternative<TowerWitness>(s.tower);
    report.proxy2 = report.proxy2 && s.local_ok;
    report.proxy3 = report.proxy3 && tower_ok;
    if ((!s.local_ok || !tower_ok) && !report.first_failure) report.first_failure = i;
    if (s.local_ok != tower_ok && report.discrepancy.empty())
      report.discrepancy = "sample " + std::to_string(i) + ": local equality and tower disagree";
  }
  const bool proxy1 = std::holds_alternative<CanonicalUpTo>(report.proxy1);
  report.agree = proxy1 == report.proxy2 && proxy1 == report.proxy3;
  if (!report.agree && report.discrepancy.empty())
    report.discrepancy = std::string("proxy 1 ") + (proxy1 ? "passes" : "fails") + ", proxy 2 " +
                         (report.proxy2 ? "passes" : "fails") + ", proxy 3 " + (report.proxy3 ? "passes" : "fails");

  if (const auto* c = std::get_if<Counterexample>(&report.proxy1)) {
    bool match = report.first_failure.has_value();
    if (match) {
      const auto& s = report.samples[*report.first_failure];
      match = s.s == c->s && s.t == c->t;
      if (const auto* lf = std::get_if<LocalFailure>(&s.tower))
        match = match && std::equal(lf->points.begin(), lf->points.end(), s.support.begin());
      else
        match = false;
    }
    report.witnesses_match = match;
  } else {
    report.witnesses_match = !report.first_failure;
  }
  if (!report.witnesses_match && report.discrepancy.empty()) report.discrepancy = "witnesses do not match";
  return report;
}

}  // namespace canonfn
