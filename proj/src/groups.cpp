#include "canonfn/groups.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "canonfn/errors.hpp"

namespace canonfn {

namespace {

int label_compare(const OrbitLabel& a, const OrbitLabel& b) {
  if (a.type.has_value() != b.type.has_value()) return a.type.has_value() ? -1 : 1;
  if (a.type) {
    if (*a.type < *b.type) return -1;
    if (*b.type < *a.type) return 1;
  }
  const std::size_t n = std::min(a.columns.size(), b.columns.size());
  for (std::size_t i = 0; i < n; ++i)
    if (int c = label_compare(a.columns[i], b.columns[i]); c != 0) return c;
  if (a.columns.size() != b.columns.size()) return a.columns.size() < b.columns.size() ? -1 : 1;
  return 0;
}

// Tuples over {0..M} whose largest entry is M, in lexicographic order.
std::vector<std::size_t> power_index(std::size_t n, int m) {
  auto pow = [&](std::size_t b) {
    std::size_t r = 1;
    for (int i = 0; i < m; ++i) r *= b;
    return r;
  };
  std::size_t top = 0;
  while (pow(top + 1) <= n) ++top;
  std::size_t rank = n - pow(top);
  std::vector<std::size_t> t(m, 0);
  while (true) {
    if (std::find(t.begin(), t.end(), top) != t.end()) {
      if (rank == 0) return t;
      --rank;
    }
    int i = m - 1;
    while (i >= 0 && t[i] == top) t[i--] = 0;
    if (i < 0) break;
    ++t[i];
  }
  throw std::logic_error("power enumeration out of range");
}

// Minimal recursive-descent reader used for group and label strings.
class Reader {
public:
  explicit Reader(std::string text) : text_(std::move(text)) {}

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }
  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }
  bool accept(const std::string& tok) {
    skip_ws();
    if (text_.compare(pos_, tok.size(), tok) == 0) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }
  void expect(const std::string& tok) {
    if (!accept(tok)) fail("'" + tok + "'");
  }
  std::string word() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '-' || text_[pos_] == '_' ||
            text_[pos_] == '/' || text_[pos_] == '+'))
      ++pos_;
    if (start == pos_) fail("identifier or number");
    return text_.substr(start, pos_ - start);
  }
  [[noreturn]] void fail(const std::string& expected) {
    std::string tok = pos_ < text_.size() ? text_.substr(pos_, 8) : "<end>";
    throw UsageError(pos_, tok, expected);
  }
  std::size_t pos() const { return pos_; }

private:
  std::string text_;
  std::size_t pos_ = 0;
};

Element parse_element(Reader& r, const LimitStructure& limit) {
  std::size_t at = r.pos();
  std::string w = r.word();
  if (limit.is_dlo()) {
    try {
      return Element(Rational::parse(w));
    } catch (const std::exception&) {
      throw UsageError(at, w, "rational literal");
    }
  }
  if (w.size() > 1 && w[0] == 'v' && std::all_of(w.begin() + 1, w.end(), ::isdigit))
    return Element::index(std::stoull(w.substr(1)));
  throw UsageError(at, w, "element of the form v<index>");
}

Point parse_point(Reader& r, const GroupPresentation& g) {
  const LimitStructure& limit = g.limit();
  std::vector<Element> coords;
  if (r.accept("(")) {
    coords.push_back(parse_element(r, limit));
    while (r.accept(",")) coords.push_back(parse_element(r, limit));
    r.expect(")");
  } else {
    coords.push_back(parse_element(r, limit));
  }
  if (static_cast<int>(coords.size()) != g.point_arity()) r.fail(std::to_string(g.point_arity()) + " coordinates");
  return Point(std::move(coords));
}

GroupPresentation parse_group_rec(Reader& r) {
  if (r.accept("aut(")) {
    std::size_t at = r.pos();
    std::string name = r.word();
    std::shared_ptr<const LimitStructure> limit;
    try {
      limit = builtin_limit(name);
    } catch (const std::invalid_argument&) {
      throw UsageError(at, name, "dlo | rado | ordered-rado | pureset");
    }
    r.expect(")");
    return GroupPresentation::aut(limit);
  }
  if (r.accept("power(")) {
    auto base = parse_group_rec(r);
    r.expect(",");
    std::size_t at = r.pos();
    std::string w = r.word();
    if (!std::all_of(w.begin(), w.end(), ::isdigit) || std::stoi(w) < 1) throw UsageError(at, w, "positive integer");
    r.expect(")");
    return GroupPresentation::power(base, std::stoi(w));
  }
  if (r.accept("stab(")) {
    auto base = parse_group_rec(r);
    r.expect(";");
    std::vector<Point> constants;
    if (r.peek() != ')') {
      constants.push_back(parse_point(r, base));
      while (r.accept(",")) constants.push_back(parse_point(r, base));
    }
    r.expect(")");
    return GroupPresentation::stabilizer(base, std::move(constants));
  }
  r.fail("aut( | power( | stab(");
}

}  // namespace

// -------------------------------------------------------------------- Point

Point parse_point(const GroupPresentation& g, const std::string& text) {
  Reader r(text);
  Point p = parse_point(r, g);
  if (!r.at_end()) r.fail("end of point");
  return p;
}

std::string Point::str() const {
  if (coords.size() == 1) return coords[0].str();
  std::string out = "(";
  for (std::size_t i = 0; i < coords.size(); ++i) out += (i ? "," : "") + coords[i].str();
  return out + ")";
}

Point rational_point(const Rational& r) { return Point(Element(r)); }

Point rational_point(std::initializer_list<Rational> coords) {
  std::vector<Element> c;
  for (const auto& r : coords) c.emplace_back(r);
  return Point(std::move(c));
}

bool OrbitLabel::operator==(const OrbitLabel& o) const { return label_compare(*this, o) == 0; }
bool OrbitLabel::operator<(const OrbitLabel& o) const { return label_compare(*this, o) < 0; }

// -------------------------------------------------------- GroupPresentation

GroupPresentation GroupPresentation::aut(std::shared_ptr<const LimitStructure> limit) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::AutLimit;
  n->limit = std::move(limit);
  n->point_arity = 1;
  return GroupPresentation(n);
}

GroupPresentation GroupPresentation::power(const GroupPresentation& base, int m) {
  if (m < 1) throw std::invalid_argument("power arity must be >= 1");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Power;
  n->limit = base.limit_ptr();
  n->base = std::make_shared<const GroupPresentation>(base);
  n->m = m;
  n->point_arity = base.point_arity() * m;
  GroupPresentation g(n);
  if (g.depth() > 3) throw std::invalid_argument("group presentations nest at most 3 deep");
  return g;
}

GroupPresentation GroupPresentation::stabilizer(const GroupPresentation& base, std::vector<Point> constants) {
  for (const auto& c : constants) {
    if (static_cast<int>(c.coords.size()) != base.point_arity())
      throw std::invalid_argument("stabilizer constant " + c.str() + " is not a point of " + base.str());
    for (const auto& e : c.coords)
      if (!base.limit().index_of(e)) throw std::invalid_argument("stabilizer constant outside the domain");
  }
  auto n = std::make_shared<Node>();
  n->kind = Kind::Stabilizer;
  n->limit = base.limit_ptr();
  n->base = std::make_shared<const GroupPresentation>(base);
  n->constants = std::move(constants);
  n->point_arity = base.point_arity();
  GroupPresentation g(n);
  if (g.depth() > 3) throw std::invalid_argument("group presentations nest at most 3 deep");
  return g;
}

int GroupPresentation::depth() const { return kind() == Kind::AutLimit ? 1 : 1 + base().depth(); }

Point GroupPresentation::point(std::size_t n) const {
  switch (kind()) {
    case Kind::AutLimit:
      return Point(limit().element(n));
    case Kind::Stabilizer:
      return base().point(n);
    case Kind::Power: {
      std::vector<Element> coords;
      for (std::size_t i : power_index(n, power_arity())) {
        auto p = base().point(i);
        coords.insert(coords.end(), p.coords.begin(), p.coords.end());
      }
      return Point(std::move(coords));
    }
  }
  throw std::logic_error("unreachable");
}

OrbitLabel GroupPresentation::label(std::span<const Point> tuple) const {
  for (const auto& p : tuple)
    if (static_cast<int>(p.coords.size()) != point_arity())
      throw std::invalid_argument("point " + p.str() + " does not belong to " + str());
  switch (kind()) {
    case Kind::AutLimit: {
      std::vector<Element> elems;
      for (const auto& p : tuple) elems.push_back(p.coords[0]);
      return OrbitLabel{qf_type(limit(), elems), {}};
    }
    case Kind::Power: {
      const int a = base().point_arity();
      OrbitLabel out;
      for (int col = 0; col < power_arity(); ++col) {
        std::vector<Point> column;
        for (const auto& p : tuple)
          column.emplace_back(std::vector<Element>(p.coords.begin() + col * a, p.coords.begin() + (col + 1) * a));
        out.columns.push_back(base().label(column));
      }
      return out;
    }
    case Kind::Stabilizer: {
      std::vector<Point> extended(tuple.begin(), tuple.end());
      extended.insert(extended.end(), constants().begin(), constants().end());
      return base().label(extended);
    }
  }
  throw std::logic_error("unreachable");
}

bool GroupPresentation::same_orbit(std::span<const Point> s, std::span<const Point> t) const {
  if (s.size() != t.size()) return false;
  return label(s) == label(t);
}

int GroupPresentation::label_arity(const OrbitLabel& l) const {
  switch (kind()) {
    case Kind::AutLimit:
      return l.type->arity();
    case Kind::Power:
      return base().label_arity(l.columns.at(0));
    case Kind::Stabilizer:
      return base().label_arity(l) - static_cast<int>(constants().size());
  }
  throw std::logic_error("unreachable");
}

OrbitLabel GroupPresentation::reindex(const OrbitLabel& l, std::span<const int> sigma) const {
  switch (kind()) {
    case Kind::AutLimit:
      return OrbitLabel{l.type->reindex(sigma), {}};
    case Kind::Power: {
      OrbitLabel out;
      for (const auto& col : l.columns) out.columns.push_back(base().reindex(col, sigma));
      return out;
    }
    case Kind::Stabilizer: {
      const int k = label_arity(l);
      std::vector<int> ext(sigma.begin(), sigma.end());
      for (std::size_t c = 0; c < constants().size(); ++c) ext.push_back(k + static_cast<int>(c));
      return base().reindex(l, ext);
    }
  }
  throw std::logic_error("unreachable");
}

std::vector<OrbitLabel> GroupPresentation::enumerate_labels(int k) const {
  std::vector<OrbitLabel> out;
  switch (kind()) {
    case Kind::AutLimit:
      for (auto& t : enumerate_types(limit(), k)) out.push_back(OrbitLabel{std::move(t), {}});
      break;
    case Kind::Power: {
      auto base_labels = base().enumerate_labels(k);
      std::vector<std::size_t> idx(power_arity(), 0);
      if (base_labels.empty()) break;
      while (true) {
        OrbitLabel l;
        for (auto i : idx) l.columns.push_back(base_labels[i]);
        out.push_back(std::move(l));
        int i = power_arity() - 1;
        while (i >= 0 && idx[i] + 1 == base_labels.size()) idx[i--] = 0;
        if (i < 0) break;
        ++idx[i];
      }
      break;
    }
    case Kind::Stabilizer: {
      const int c = static_cast<int>(constants().size());
      if (c == 0) return base().enumerate_labels(k);
      OrbitLabel of_constants = base().label(constants());
      std::vector<int> tail(c);
      for (int i = 0; i < c; ++i) tail[i] = k + i;
      for (auto& l : base().enumerate_labels(k + c))
        if (base().reindex(l, tail) == of_constants) out.push_back(std::move(l));
      break;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t GroupPresentation::count_orbits(int k) const { return enumerate_labels(k).size(); }

std::string GroupPresentation::str() const {
  switch (kind()) {
    case Kind::AutLimit:
      return "aut(" + limit().name() + ")";
    case Kind::Power:
      return "power(" + base().str() + "," + std::to_string(power_arity()) + ")";
    case Kind::Stabilizer: {
      std::string out = "stab(" + base().str() + ";";
      for (std::size_t i = 0; i < constants().size(); ++i) out += (i ? "," : " ") + constants()[i].str();
      return out + ")";
    }
  }
  throw std::logic_error("unreachable");
}

std::string GroupPresentation::label_str(const OrbitLabel& l) const {
  switch (kind()) {
    case Kind::AutLimit:
      return type_str(limit(), *l.type);
    case Kind::Power: {
      std::string out;
      for (const auto& col : l.columns) out += "[" + base().label_str(col) + "]";
      return out;
    }
    case Kind::Stabilizer:
      return base().label_str(l);
  }
  throw std::logic_error("unreachable");
}

OrbitLabel GroupPresentation::parse_label(const std::string& text) const {
  switch (kind()) {
    case Kind::AutLimit:
      return OrbitLabel{parse_type(limit(), text), {}};
    case Kind::Stabilizer: {
      OrbitLabel l = base().parse_label(text);
      if (label_arity(l) < 1) throw std::invalid_argument("stabilized label '" + text + "' is too short");
      std::vector<int> tail;
      const int k = label_arity(l);
      for (std::size_t i = 0; i < constants().size(); ++i) tail.push_back(k + static_cast<int>(i));
      if (base().reindex(l, tail) != base().label(constants()))
        throw std::invalid_argument("label '" + text + "' does not extend the type of the constants");
      return l;
    }
    case Kind::Power: {
      OrbitLabel out;
      std::size_t i = 0;
      while (i < text.size()) {
        if (text[i] != '[') throw std::invalid_argument("expected '[' in power label '" + text + "'");
        int depth = 0;
        std::size_t j = i;
        for (; j < text.size(); ++j) {
          if (text[j] == '[') ++depth;
          if (text[j] == ']' && --depth == 0) break;
        }
        if (j >= text.size()) throw std::invalid_argument("unbalanced brackets in '" + text + "'");
        out.columns.push_back(base().parse_label(text.substr(i + 1, j - i - 1)));
        i = j + 1;
      }
      if (static_cast<int>(out.columns.size()) != power_arity())
        throw std::invalid_argument("power label '" + text + "' has the wrong number of columns");
      const int k = base().label_arity(out.columns[0]);
      for (const auto& c : out.columns)
        if (base().label_arity(c) != k) throw std::invalid_argument("power label columns differ in arity");
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

GroupPresentation parse_group(const std::string& text) {
  Reader r(text);
  auto g = parse_group_rec(r);
  if (!r.at_end()) r.fail("end of group specification");
  return g;
}

// --------------------------------------------------------------- type text

std::string type_str(const LimitStructure& limit, const TupleTypeRecord& type) {
  const int b = type.block_count();
  std::vector<std::vector<int>> members(b);
  for (int pos = 0; pos < type.arity(); ++pos) members[type.pattern()[pos]].push_back(pos + 1);
  auto block_text = [&](int blk) {
    std::string s;
    for (std::size_t i = 0; i < members[blk].size(); ++i) s += (i ? "=" : "") + std::to_string(members[blk][i]);
    return s;
  };
  const auto order = limit.age().order_symbol();
  std::vector<int> blocks(b);
  for (int i = 0; i < b; ++i) blocks[i] = i;
  std::string out;
  if (order) {
    std::sort(blocks.begin(), blocks.end(),
              [&](int x, int y) { return type.diagram().holds(*order, {x, y}); });
    for (int i = 0; i < b; ++i) out += (i ? "<" : "") + block_text(blocks[i]);
  } else {
    for (int i = 0; i < b; ++i) out += (i ? "," : "") + block_text(blocks[i]);
  }
  std::string atoms;
  const auto& sig = limit.signature();
  for (std::size_t s = 0; s < sig.size(); ++s) {
    if (order && s == *order) continue;
    for (const auto& t : type.diagram().table(s)) {
      atoms += " " + sig[s].name + "(";
      for (std::size_t i = 0; i < t.size(); ++i) atoms += (i ? "," : "") + std::to_string(members[t[i]][0]);
      atoms += ")";
    }
  }
  if (!atoms.empty()) out += " |" + atoms;
  return out;
}

TupleTypeRecord parse_type(const LimitStructure& limit, const std::string& text) {
  auto bad = [&](const std::string& why) { return std::invalid_argument("bad type '" + text + "': " + why); };
  const auto order = limit.age().order_symbol();
  std::string head = text, tail;
  if (auto bar = text.find('|'); bar != std::string::npos) {
    head = text.substr(0, bar);
    tail = text.substr(bar + 1);
  }
  auto trim = [](std::string s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    return s.substr(i);
  };
  head = trim(head);
  const char sep = order ? '<' : ',';
  std::vector<std::vector<int>> listed;
  std::stringstream hs(head);
  std::string block;
  while (std::getline(hs, block, sep)) {
    std::vector<int> positions;
    std::stringstream bs(block);
    std::string num;
    while (std::getline(bs, num, '=')) {
      num = trim(num);
      if (num.empty() || !std::all_of(num.begin(), num.end(), ::isdigit)) throw bad("position '" + num + "'");
      positions.push_back(std::stoi(num));
    }
    if (positions.empty()) throw bad("empty block");
    listed.push_back(positions);
  }
  int k = 0;
  for (const auto& b : listed) k += static_cast<int>(b.size());
  if (k == 0) throw bad("no positions");
  std::vector<int> listed_block(k + 1, -1);
  for (std::size_t i = 0; i < listed.size(); ++i)
    for (int p : listed[i]) {
      if (p < 1 || p > k || listed_block[p] >= 0) throw bad("positions must be 1.." + std::to_string(k) + " once each");
      listed_block[p] = static_cast<int>(i);
    }
  // Renumber blocks by first position.
  std::vector<int> rank(listed.size(), -1), pattern;
  int next = 0;
  for (int p = 1; p <= k; ++p) {
    int lb = listed_block[p];
    if (rank[lb] < 0) rank[lb] = next++;
    pattern.push_back(rank[lb]);
  }
  FiniteStructure diagram(limit.signature(), next);
  if (order)
    for (std::size_t i = 0; i < listed.size(); ++i)
      for (std::size_t j = i + 1; j < listed.size(); ++j) diagram.set(*order, {rank[i], rank[j]});
  std::stringstream ts(trim(tail));
  std::string atom;
  while (ts >> atom) {
    auto open = atom.find('(');
    if (open == std::string::npos || atom.back() != ')') throw bad("atom '" + atom + "'");
    auto sym = limit.signature().index_of(atom.substr(0, open));
    if (!sym || (order && *sym == *order)) throw bad("unknown relation in '" + atom + "'");
    IndexTuple t;
    std::stringstream as(atom.substr(open + 1, atom.size() - open - 2));
    std::string num;
    while (std::getline(as, num, ',')) {
      if (num.empty() || !std::all_of(num.begin(), num.end(), ::isdigit)) throw bad("position in '" + atom + "'");
      int p = std::stoi(num);
      if (p < 1 || p > k) throw bad("position out of range in '" + atom + "'");
      t.push_back(pattern[p - 1]);
    }
    if (static_cast<int>(t.size()) != limit.signature()[*sym].arity) throw bad("arity of '" + atom + "'");
    diagram.set(*sym, t);
  }
  if (!limit.age().contains(diagram)) throw bad("diagram is not in the age");
  TupleTypeRecord out(pattern, diagram);
  if (type_str(limit, out) != trim(text)) throw bad("not in canonical form (expected '" + type_str(limit, out) + "')");
  return out;
}

// ------------------------------------------------------ PartialAutomorphism

PartialAutomorphism::PartialAutomorphism(std::shared_ptr<const LimitStructure> limit, std::vector<Element> domain,
                                         std::vector<Element> range, std::size_t scan_budget)
    : limit_(std::move(limit)), domain_(std::move(domain)), range_(std::move(range)), scan_budget_(scan_budget) {
  if (domain_.size() != range_.size()) throw TypeMismatch("partial map has unequal domain and range lengths");
  if (!certified()) throw TypeMismatch("domain and range tuples have different types");
}

std::optional<Element> PartialAutomorphism::image(const Element& x) const {
  for (std::size_t i = 0; i < domain_.size(); ++i)
    if (domain_[i] == x) return range_[i];
  return std::nullopt;
}

std::optional<Element> PartialAutomorphism::preimage(const Element& y) const {
  for (std::size_t i = 0; i < range_.size(); ++i)
    if (range_[i] == y) return domain_[i];
  return std::nullopt;
}

bool PartialAutomorphism::certified() const {
  if (domain_.empty()) return true;
  return qf_type(*limit_, domain_) == qf_type(*limit_, range_);
}

Element PartialAutomorphism::extend(const Element& x) {
  if (auto y = image(x)) return *y;
  std::vector<Element> dom = domain_;
  dom.push_back(x);
  const auto want = qf_type(*limit_, dom);
  std::vector<Element> ran = range_;
  ran.emplace_back();
  for (std::size_t n = 0; n < scan_budget_; ++n) {
    ran.back() = limit_->element(n);
    if (qf_type(*limit_, ran) == want) {
      domain_.push_back(x);
      range_.push_back(ran.back());
      return ran.back();
    }
  }
  throw BudgetExhausted("no admissible image for " + x.str() + " among the first " + std::to_string(scan_budget_) +
                        " elements");
}

Element PartialAutomorphism::extend_back(const Element& y) {
  if (auto x = preimage(y)) return *x;
  std::vector<Element> ran = range_;
  ran.push_back(y);
  const auto want = qf_type(*limit_, ran);
  std::vector<Element> dom = domain_;
  dom.emplace_back();
  for (std::size_t n = 0; n < scan_budget_; ++n) {
    dom.back() = limit_->element(n);
    if (qf_type(*limit_, dom) == want) {
      domain_.push_back(dom.back());
      range_.push_back(y);
      return dom.back();
    }
  }
  throw BudgetExhausted("no admissible preimage for " + y.str() + " among the first " + std::to_string(scan_budget_) +
                        " elements");
}

PartialAutomorphism automorphism_extending(const GroupPresentation& g,
                                           const std::vector<std::pair<Element, Element>>& p) {
  if (g.kind() != GroupPresentation::Kind::AutLimit)
    throw std::invalid_argument("automorphism_extending needs an aut(...) presentation");
  std::vector<Element> dom, ran;
  for (const auto& [a, b] : p) {
    dom.push_back(a);
    ran.push_back(b);
  }
  return PartialAutomorphism(g.limit_ptr(), std::move(dom), std::move(ran));
}

}  // namespace canonfn
