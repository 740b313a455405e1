#include "canonfn/fraisse.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <sstream>

#include "canonfn/errors.hpp"

namespace canonfn {

namespace {

int g_arity_limit = [] {
  if (const char* env = std::getenv("CANONFN_ARITY_LIMIT")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 6;
}();

// Calls fn on every tuple of the given arity over {0..n-1} in lexicographic
// order.
template <typename Fn>
void for_each_tuple(int n, int arity, Fn&& fn) {
  if (n <= 0 && arity > 0) return;
  IndexTuple t(arity, 0);
  while (true) {
    fn(t);
    int i = arity - 1;
    while (i >= 0 && t[i] == n - 1) {
      t[i] = 0;
      --i;
    }
    if (i < 0) return;
    ++t[i];
  }
}

bool is_strict_linear_order(const FiniteStructure& s, std::size_t sym) {
  const int n = s.size();
  for (int i = 0; i < n; ++i) {
    if (s.holds(sym, {i, i})) return false;
    for (int j = i + 1; j < n; ++j)
      if (s.holds(sym, {i, j}) == s.holds(sym, {j, i})) return false;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (s.holds(sym, {i, j}))
        for (int k = 0; k < n; ++k)
          if (s.holds(sym, {j, k}) && !s.holds(sym, {i, k})) return false;
  return true;
}

bool is_simple_graph(const FiniteStructure& s, std::size_t sym) {
  for (const auto& t : s.table(sym)) {
    if (t[0] == t[1]) return false;
    if (!s.holds(sym, {t[1], t[0]})) return false;
  }
  return true;
}

// Is there an injective map from `pattern` into `host` preserving and
// reflecting every relation?
bool embeds_induced(const FiniteStructure& pattern, const FiniteStructure& host) {
  const int k = pattern.size();
  if (k > host.size()) return false;
  std::vector<int> image(k, -1);
  std::vector<bool> used(host.size(), false);
  const auto& sig = pattern.signature();

  auto consistent = [&](int upto) {
    // Check all tuples over {0..upto} that mention upto.
    for (std::size_t s = 0; s < sig.size(); ++s) {
      bool ok = true;
      for_each_tuple(upto + 1, sig[s].arity, [&](const IndexTuple& t) {
        if (!ok) return;
        if (std::find(t.begin(), t.end(), upto) == t.end()) return;
        IndexTuple mapped(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) mapped[i] = image[t[i]];
        if (pattern.holds(s, t) != host.holds(s, mapped)) ok = false;
      });
      if (!ok) return false;
    }
    return true;
  };

  std::function<bool(int)> place = [&](int i) {
    if (i == k) return true;
    for (int v = 0; v < host.size(); ++v) {
      if (used[v]) continue;
      image[i] = v;
      used[v] = true;
      if (consistent(i) && place(i + 1)) return true;
      used[v] = false;
    }
    image[i] = -1;
    return false;
  };
  return place(0);
}

std::string structure_digest(const FiniteStructure& s) {
  std::ostringstream os;
  os << s.size() << ":";
  for (std::size_t sym = 0; sym < s.signature().size(); ++sym) {
    os << s.signature()[sym].name << "{";
    for (const auto& t : s.table(sym)) {
      for (int v : t) os << v << ",";
      os << ";";
    }
    os << "}";
  }
  return os.str();
}

// Depth-first enumeration of one-point extensions of `base`, bits decided
// group by group in extension_tuples order. When `demand` is given, groups
// below its fragment size are forced to agree with it.
template <typename Fn>
void extension_search(const AgeOracle& age, const FiniteStructure& base, const FiniteStructure* demand, Fn&& on_found) {
  const int n = base.size();
  const auto& sig = age.signature();
  auto tuples = extension_tuples(sig, n);
  // Split into groups by largest old index.
  std::vector<std::vector<std::pair<std::size_t, IndexTuple>>> groups(n + 1);
  for (auto& [sym, t] : tuples) {
    int g = -1;
    for (int v : t)
      if (v != n) g = std::max(g, v);
    groups[g + 1].emplace_back(sym, t);
  }
  const int m = demand ? demand->size() - 1 : -1;
  const bool prune = age.hereditary_trusted();
  FiniteStructure work = base.with_point();
  bool stop = false;

  const int local = age.local_size();
  // Checks {0..g, n} assuming {0..g-1, n} already passed. With a known local
  // size only the subsets through g and n need checking.
  auto prefix_ok = [&](int g) {
    if (local <= 0) {
      std::vector<int> pts(g + 1);
      std::iota(pts.begin(), pts.end(), 0);
      pts.push_back(n);
      return age.contains(work.induced(pts));
    }
    if (g < 0) {
      std::vector<int> pts{n};
      return age.contains(work.induced(pts));
    }
    std::vector<int> chosen;
    std::function<bool(int)> subsets = [&](int from) {
      std::vector<int> pts(chosen);
      pts.push_back(g);
      pts.push_back(n);
      if (!age.contains(work.induced(pts))) return false;
      if (static_cast<int>(chosen.size()) + 2 >= local) return true;
      for (int i = from; i < g; ++i) {
        chosen.push_back(i);
        bool ok = subsets(i + 1);
        chosen.pop_back();
        if (!ok) return false;
      }
      return true;
    };
    return subsets(0);
  };

  std::function<void(int)> descend = [&](int gi) {
    if (stop) return;
    if (gi == n + 1) {
      if (prune || age.contains(work)) stop = !on_found(work);
      return;
    }
    const auto& group = groups[gi];
    const int g = gi - 1;
    const bool forced = demand && g < m;
    const std::size_t len = group.size();
    const std::size_t count = forced ? 1 : (std::size_t{1} << len);
    for (std::size_t mask = 0; mask < count && !stop; ++mask) {
      for (std::size_t i = 0; i < len; ++i) {
        const auto& [sym, t] = group[i];
        bool bit;
        if (forced) {
          IndexTuple dt(t.size());
          for (std::size_t j = 0; j < t.size(); ++j) dt[j] = (t[j] == n) ? m : t[j];
          bit = demand->holds(sym, dt);
        } else {
          bit = (mask >> (len - 1 - i)) & 1u;
        }
        work.set(sym, t, bit);
      }
      if (prune && gi < n + 1 && !prefix_ok(g)) continue;
      descend(gi + 1);
    }
    for (const auto& [sym, t] : group) work.set(sym, t, false);
  };
  descend(0);
}

constexpr std::size_t kMaxBruteForceBits = 24;

// Every labeled structure on k points, as a list of (symbol, tuple) slots.
std::vector<std::pair<std::size_t, IndexTuple>> all_slots(const Signature& sig, int k) {
  std::vector<std::pair<std::size_t, IndexTuple>> all;
  for (std::size_t s = 0; s < sig.size(); ++s)
    for_each_tuple(k, sig[s].arity, [&](const IndexTuple& t) { all.emplace_back(s, t); });
  return all;
}

template <typename Fn>
void for_each_structure(const Signature& sig, int k, Fn&& fn) {
  auto all = all_slots(sig, k);
  if (all.size() > kMaxBruteForceBits)
    throw std::length_error("brute-force enumeration of " + std::to_string(k) + "-point structures is too large");
  const std::uint64_t total = std::uint64_t{1} << all.size();
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    FiniteStructure s(sig, k);
    for (std::size_t i = 0; i < all.size(); ++i)
      if ((mask >> i) & 1u) s.set(all[i].first, all[i].second);
    fn(s);
  }
}

std::vector<FiniteStructure> brute_force_members(const AgeOracle& age, int k) {
  std::vector<FiniteStructure> out;
  for_each_structure(age.signature(), k, [&](const FiniteStructure& s) {
    if (age.contains(s)) out.push_back(s);
  });
  return out;
}

}  // namespace

int arity_limit() { return g_arity_limit; }
void set_arity_limit(int limit) { g_arity_limit = limit; }
void require_arity(int arity) {
  if (arity > g_arity_limit) throw ArityLimitExceeded(arity, g_arity_limit);
}

// ---------------------------------------------------------------- Signature

Signature::Signature(std::vector<RelationSymbol> symbols) : symbols_(std::move(symbols)) {
  std::set<std::string> names;
  for (const auto& s : symbols_) {
    if (s.arity < 1) throw std::invalid_argument("relation '" + s.name + "' must have arity >= 1");
    if (!names.insert(s.name).second) throw std::invalid_argument("duplicate relation symbol '" + s.name + "'");
  }
}

std::optional<std::size_t> Signature::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < symbols_.size(); ++i)
    if (symbols_[i].name == name) return i;
  return std::nullopt;
}

// ----------------------------------------------------------- FiniteStructure

FiniteStructure::FiniteStructure(Signature signature, int size)
    : signature_(std::move(signature)), size_(size), tables_(signature_.size()) {}

bool FiniteStructure::holds(std::size_t symbol, const IndexTuple& tuple) const {
  return tables_[symbol].count(tuple) > 0;
}

void FiniteStructure::set(std::size_t symbol, const IndexTuple& tuple, bool value) {
  if (static_cast<int>(tuple.size()) != signature_[symbol].arity)
    throw std::invalid_argument("tuple arity does not match symbol '" + signature_[symbol].name + "'");
  for (int v : tuple)
    if (v < 0 || v >= size_) throw std::out_of_range("tuple index out of range");
  if (value)
    tables_[symbol].insert(tuple);
  else
    tables_[symbol].erase(tuple);
}

FiniteStructure FiniteStructure::induced(std::span<const int> points) const {
  FiniteStructure out(signature_, static_cast<int>(points.size()));
  std::vector<int> position(size_, -1);
  for (std::size_t i = 0; i < points.size(); ++i) position[points[i]] = static_cast<int>(i);
  for (std::size_t s = 0; s < tables_.size(); ++s) {
    const int arity = signature_[s].arity;
    double candidates = 1;
    for (int i = 0; i < arity; ++i) candidates *= static_cast<double>(points.size());
    if (candidates < static_cast<double>(tables_[s].size())) {
      // Few points: look up each candidate tuple instead of scanning.
      IndexTuple t(arity);
      for_each_tuple(static_cast<int>(points.size()), arity, [&](const IndexTuple& idx) {
        for (int i = 0; i < arity; ++i) t[i] = points[idx[i]];
        if (tables_[s].count(t)) out.tables_[s].insert(idx);
      });
      continue;
    }
    for (const auto& t : tables_[s]) {
      IndexTuple mapped(t.size());
      bool inside = true;
      for (std::size_t i = 0; i < t.size() && inside; ++i) {
        mapped[i] = position[t[i]];
        inside = mapped[i] >= 0;
      }
      if (inside) out.tables_[s].insert(std::move(mapped));
    }
  }
  return out;
}

FiniteStructure FiniteStructure::with_point() const {
  FiniteStructure out = *this;
  ++out.size_;
  return out;
}

// ----------------------------------------------------------------- AgeOracle

AgeOracle AgeOracle::linear_orders() {
  AgeOracle a;
  a.kind_ = AgeKind::LinearOrders;
  a.local_size_ = 3;
  a.name_ = "linear-orders";
  a.signature_ = Signature({{"<", 2}});
  a.order_symbol_ = 0;
  a.member_ = [](const FiniteStructure& s) { return is_strict_linear_order(s, 0); };
  return a;
}

AgeOracle AgeOracle::graphs() {
  AgeOracle a;
  a.kind_ = AgeKind::Graphs;
  a.local_size_ = 2;
  a.name_ = "graphs";
  a.signature_ = Signature({{"E", 2}});
  a.member_ = [](const FiniteStructure& s) { return is_simple_graph(s, 0); };
  return a;
}

AgeOracle AgeOracle::ordered_graphs() {
  AgeOracle a;
  a.kind_ = AgeKind::OrderedGraphs;
  a.local_size_ = 3;
  a.name_ = "ordered-graphs";
  a.signature_ = Signature({{"<", 2}, {"E", 2}});
  a.order_symbol_ = 0;
  a.member_ = [](const FiniteStructure& s) { return is_strict_linear_order(s, 0) && is_simple_graph(s, 1); };
  return a;
}

AgeOracle AgeOracle::pure_sets() {
  AgeOracle a;
  a.kind_ = AgeKind::PureSets;
  a.local_size_ = 1;
  a.name_ = "pure-sets";
  a.member_ = [](const FiniteStructure&) { return true; };
  return a;
}

AgeOracle AgeOracle::forbidding(const AgeOracle& base, std::vector<FiniteStructure> forbidden, std::string name) {
  for (const auto& f : forbidden)
    if (f.signature() != base.signature())
      throw std::invalid_argument("forbidden substructure signature differs from the base age");
  AgeOracle a = base;
  a.kind_ = AgeKind::Forbidden;
  if (name.empty()) {
    name = base.name() + "-forbidding";
    for (const auto& f : forbidden) name += "[" + structure_digest(f) + "]";
  }
  a.name_ = std::move(name);
  a.forbidden_ = forbidden;
  if (base.local_size_ > 0) {
    a.local_size_ = base.local_size_;
    for (const auto& f : forbidden) a.local_size_ = std::max(a.local_size_, f.size());
  }
  auto base_member = base.member_;
  a.member_ = [base_member, forbidden = std::move(forbidden)](const FiniteStructure& s) {
    if (!base_member(s)) return false;
    for (const auto& f : forbidden)
      if (embeds_induced(f, s)) return false;
    return true;
  };
  return a;
}

AgeOracle AgeOracle::custom(std::string name, Signature signature, Predicate member, bool hereditary) {
  AgeOracle a;
  a.kind_ = AgeKind::Custom;
  a.name_ = std::move(name);
  a.signature_ = std::move(signature);
  a.member_ = std::move(member);
  a.hereditary_ = hereditary;
  return a;
}

bool AgeOracle::contains(const FiniteStructure& s) const {
  if (s.signature() != signature_) return false;
  return member_(s);
}

// ---------------------------------------------------------------- extensions

std::vector<std::pair<std::size_t, IndexTuple>> extension_tuples(const Signature& signature, int n) {
  std::vector<std::pair<std::size_t, IndexTuple>> out;
  for (int g = -1; g < n; ++g) {
    // Tuples over {0..g, n} in lexicographic order that use n and (for g >= 0)
    // g, generated with pruning on what the remaining positions can cover.
    for (std::size_t s = 0; s < signature.size(); ++s) {
      const int arity = signature[s].arity;
      IndexTuple t(arity);
      std::function<void(int, bool, bool)> fill = [&](int i, bool has_g, bool has_new) {
        const int missing = (has_g ? 0 : 1) + (has_new ? 0 : 1);
        if (arity - i < missing) return;
        if (i == arity) {
          out.emplace_back(s, t);
          return;
        }
        // With no slack every remaining position must supply a missing value.
        const bool tight = arity - i == missing;
        if (!tight)
          for (int v = 0; v < g; ++v) {
            t[i] = v;
            fill(i + 1, has_g, has_new);
          }
        if (g >= 0 && (!tight || !has_g)) {
          t[i] = g;
          fill(i + 1, true, has_new);
        }
        if (!tight || !has_new) {
          t[i] = n;
          fill(i + 1, has_g, true);
        }
      };
      fill(0, g < 0, false);
    }
  }
  return out;
}

std::vector<FiniteStructure> one_point_extensions(const AgeOracle& age, const FiniteStructure& base,
                                                  std::size_t limit) {
  std::vector<FiniteStructure> out;
  if (limit == 0) return out;
  extension_search(age, base, nullptr, [&](const FiniteStructure& s) {
    out.push_back(s);
    return out.size() < limit;
  });
  return out;
}

std::optional<FiniteStructure> complete_demand(const AgeOracle& age, const FiniteStructure& base,
                                               const FiniteStructure& demand) {
  if (demand.size() < 1 || demand.size() - 1 > base.size())
    throw std::invalid_argument("demand larger than the base fragment");
  std::optional<FiniteStructure> out;
  extension_search(age, base, &demand, [&](const FiniteStructure& s) {
    out = s;
    return false;
  });
  return out;
}

const std::vector<FiniteStructure>& labeled_members(const AgeOracle& age, int size) {
  static std::mutex mutex;
  static std::map<std::pair<std::string, int>, std::vector<FiniteStructure>> cache;
  std::lock_guard lock(mutex);
  auto key = std::make_pair(age.name(), size);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  std::vector<FiniteStructure> level{FiniteStructure(age.signature(), 0)};
  if (!age.contains(level.front())) level.clear();
  for (int k = 0; k < size; ++k) {
    std::vector<FiniteStructure> next;
    if (age.hereditary_trusted()) {
      for (const auto& s : level) {
        auto ext = one_point_extensions(age, s);
        next.insert(next.end(), ext.begin(), ext.end());
      }
    } else {
      next = brute_force_members(age, k + 1);
    }
    level = std::move(next);
  }
  std::sort(level.begin(), level.end());
  level.erase(std::unique(level.begin(), level.end()), level.end());
  return cache.emplace(key, std::move(level)).first->second;
}

AmalgamationReport verify_amalgamation(const AgeOracle& age, int bound) {
  AmalgamationReport report;
  const auto& sig = age.signature();

  // Hereditariness: brute force over every labeled structure of each size,
  // checking that deleting any one point of a member leaves a member.
  for (int k = 1; k <= bound; ++k) {
    if (all_slots(sig, k).size() > kMaxBruteForceBits) break;
    std::optional<std::string> bad;
    for_each_structure(sig, k, [&](const FiniteStructure& s) {
      if (bad || !age.contains(s)) return;
      for (int drop = 0; drop < k && !bad; ++drop) {
        std::vector<int> pts;
        for (int v = 0; v < k; ++v)
          if (v != drop) pts.push_back(v);
        if (!age.contains(s.induced(pts)))
          bad = "member " + structure_digest(s) + " loses membership without point " + std::to_string(drop);
      }
    });
    if (bad) {
      report.ok = false;
      report.violation = "hereditary";
      report.detail = *bad;
      report.hereditary_checked_up_to = k;
      return report;
    }
    report.hereditary_checked_up_to = k;
  }

  // One-point amalgamation over every member A of size < bound: any two
  // one-point extensions B, C of A amalgamate (possibly identifying the new
  // points when B == C).
  for (int a = 0; a < bound; ++a) {
    for (const auto& base : labeled_members(age, a)) {
      auto exts = one_point_extensions(age, base);
      for (const auto& b : exts) {
        for (const auto& c : exts) {
          if (b == c) continue;
          if (!complete_demand(age, b, c)) {
            report.ok = false;
            report.violation = "amalgamation";
            report.detail = "extensions " + structure_digest(b) + " and " + structure_digest(c) + " of " +
                            structure_digest(base) + " have no amalgam";
            return report;
          }
        }
      }
    }
  }
  return report;
}

// ------------------------------------------------------------------ Element

std::string Element::str() const {
  if (is_rational()) return rational().str();
  return "v" + std::to_string(index_value());
}

// ----------------------------------------------------------- TupleTypeRecord

TupleTypeRecord::TupleTypeRecord(std::vector<int> pattern, FiniteStructure diagram)
    : pattern_(std::move(pattern)), diagram_(std::move(diagram)) {
  int next = 0;
  for (int b : pattern_) {
    if (b > next || b < 0) throw std::invalid_argument("equality pattern is not a restricted growth string");
    if (b == next) ++next;
  }
  if (next != diagram_.size()) throw std::invalid_argument("diagram size differs from the number of blocks");
}

bool TupleTypeRecord::holds(std::size_t symbol, const IndexTuple& positions) const {
  IndexTuple blocks(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) blocks[i] = pattern_.at(positions[i]);
  return diagram_.holds(symbol, blocks);
}

TupleTypeRecord TupleTypeRecord::reindex(std::span<const int> sigma) const {
  std::vector<int> old_blocks;  // distinct old blocks in order of first use
  std::vector<int> pattern;
  pattern.reserve(sigma.size());
  for (int pos : sigma) {
    int b = pattern_.at(pos);
    auto it = std::find(old_blocks.begin(), old_blocks.end(), b);
    if (it == old_blocks.end()) {
      pattern.push_back(static_cast<int>(old_blocks.size()));
      old_blocks.push_back(b);
    } else {
      pattern.push_back(static_cast<int>(it - old_blocks.begin()));
    }
  }
  return TupleTypeRecord(std::move(pattern), diagram_.induced(old_blocks));
}

// ------------------------------------------------------------------- limits

DloLimit::DloLimit() : LimitStructure(AgeOracle::linear_orders(), "dlo") {}

Element DloLimit::element(std::size_t n) const { return Element(dlo_element(n)); }

bool DloLimit::eval_relation(std::size_t symbol, std::span<const Element> tuple) const {
  if (symbol != 0 || tuple.size() != 2) throw std::invalid_argument("dlo has the single binary relation <");
  return tuple[0].rational() < tuple[1].rational();
}

std::optional<std::size_t> DloLimit::index_of(const Element& e) const {
  if (!e.is_rational()) return std::nullopt;
  return dlo_index(e.rational());
}

GenericLimit::GenericLimit(AgeOracle age, std::string name) : LimitStructure(std::move(age), std::move(name)) {
  fragment_ = FiniteStructure(this->age().signature(), 0);
}

Element GenericLimit::element(std::size_t n) const {
  grow_to(n + 1);
  return Element::index(n);
}

bool GenericLimit::eval_relation(std::size_t symbol, std::span<const Element> tuple) const {
  std::size_t top = 0;
  IndexTuple idx;
  idx.reserve(tuple.size());
  for (const auto& e : tuple) {
    top = std::max(top, e.index_value());
    idx.push_back(static_cast<int>(e.index_value()));
  }
  grow_to(top + 1);
  std::lock_guard lock(mutex_);
  return fragment_.holds(symbol, idx);
}

std::optional<std::size_t> GenericLimit::index_of(const Element& e) const {
  if (e.is_rational()) return std::nullopt;
  return e.index_value();
}

void GenericLimit::grow_to(std::size_t n) const {
  std::lock_guard lock(mutex_);
  while (static_cast<std::size_t>(fragment_.size()) < n) grow_one();
}

FiniteStructure GenericLimit::fragment() const {
  std::lock_guard lock(mutex_);
  return fragment_;
}

std::vector<DemandRecord> GenericLimit::demand_log() const {
  std::lock_guard lock(mutex_);
  return log_;
}

std::optional<FiniteStructure> GenericLimit::demand_extension(int m, std::size_t e) const {
  std::lock_guard lock(mutex_);
  return demand_extension_locked(m, e);
}

std::optional<FiniteStructure> GenericLimit::demand_extension_locked(int m, std::size_t e) const {
  if (m > fragment_.size()) return std::nullopt;
  auto& cached = extension_cache_[m];
  bool& complete = extension_complete_[m];
  if (e >= cached.size() && !complete) {
    std::vector<int> pts(m);
    std::iota(pts.begin(), pts.end(), 0);
    const std::size_t want = std::max<std::size_t>(e + 1, 2 * cached.size());
    cached = one_point_extensions(age(), fragment_.induced(pts), want);
    complete = cached.size() < want;
  }
  if (e < cached.size()) return cached[e];
  return std::nullopt;
}

std::optional<std::size_t> GenericLimit::satisfied_by(int m, const FiniteStructure& ext) const {
  // ext agrees with the fragment on the first m points; compare the tuples
  // through the new point only.
  const auto tuples = extension_tuples(signature(), m);
  IndexTuple mapped;
  for (int x = m; x < fragment_.size(); ++x) {
    bool match = true;
    for (const auto& [sym, t] : tuples) {
      mapped = t;
      for (int& v : mapped)
        if (v == m) v = x;
      if (fragment_.holds(sym, mapped) != ext.holds(sym, t)) {
        match = false;
        break;
      }
    }
    if (match) return static_cast<std::size_t>(x);
  }
  return std::nullopt;
}

void GenericLimit::grow_one() const {
  if (fragment_.size() == 0) {
    auto seed = one_point_extensions(age(), fragment_, 1);
    if (seed.empty()) throw AmalgamationFailure("age '" + age().name() + "' has no one-point structure");
    fragment_ = seed.front();
    return;
  }
  // Diagonal d holds (m, d - m) for m = 0..d. Once (d - 1, 0) has a witness
  // the fragment has at least d points, so m never outruns it in an
  // amalgamation class.
  while (true) {
    const int m = static_cast<int>(diagonal_pos_);
    const std::size_t e = diagonal_ - diagonal_pos_;
    if (++diagonal_pos_ > diagonal_) {
      ++diagonal_;
      diagonal_pos_ = 0;
    }
    if (m > fragment_.size()) {
      throw AmalgamationFailure("demand schedule outran the fragment at size " + std::to_string(fragment_.size()) +
                                " (some fragment has no one-point extension)");
    }
    auto ext = demand_extension_locked(m, e);
    if (!ext) continue;
    if (auto w = satisfied_by(m, *ext)) {
      log_.push_back({m, e, *w, false});
      continue;
    }
    auto completed = complete_demand(age(), fragment_, *ext);
    if (!completed)
      throw AmalgamationFailure("demand (" + std::to_string(m) + ", " + std::to_string(e) +
                                ") admits no completion in age '" + age().name() + "'");
    fragment_ = std::move(*completed);
    log_.push_back({m, e, static_cast<std::size_t>(fragment_.size() - 1), true});
    return;
  }
}

std::shared_ptr<GenericLimit> build_limit(const AgeOracle& age, std::size_t n) {
  auto limit = std::make_shared<GenericLimit>(age, age.name());
  limit->grow_to(n);
  return limit;
}

std::shared_ptr<const LimitStructure> builtin_limit(const std::string& name) {
  static std::mutex mutex;
  static std::map<std::string, std::shared_ptr<const LimitStructure>> instances;
  std::lock_guard lock(mutex);
  if (auto it = instances.find(name); it != instances.end()) return it->second;
  std::shared_ptr<const LimitStructure> made;
  if (name == "dlo")
    made = std::make_shared<DloLimit>();
  else if (name == "rado")
    made = std::make_shared<GenericLimit>(AgeOracle::graphs(), "rado");
  else if (name == "ordered-rado")
    made = std::make_shared<GenericLimit>(AgeOracle::ordered_graphs(), "ordered-rado");
  else if (name == "pureset")
    made = std::make_shared<GenericLimit>(AgeOracle::pure_sets(), "pureset");
  else
    throw std::invalid_argument("unknown built-in structure '" + name + "'");
  instances.emplace(name, made);
  return made;
}

// -------------------------------------------------------------------- types

TupleTypeRecord qf_type(const LimitStructure& limit, std::span<const Element> tuple) {
  if (tuple.empty()) throw std::invalid_argument("qf_type of the empty tuple");
  std::vector<int> pattern;
  std::vector<Element> reps;
  for (const auto& e : tuple) {
    auto it = std::find(reps.begin(), reps.end(), e);
    if (it == reps.end()) {
      pattern.push_back(static_cast<int>(reps.size()));
      reps.push_back(e);
    } else {
      pattern.push_back(static_cast<int>(it - reps.begin()));
    }
  }
  const auto& sig = limit.signature();
  FiniteStructure diagram(sig, static_cast<int>(reps.size()));
  std::vector<Element> args;
  for (std::size_t s = 0; s < sig.size(); ++s) {
    for_each_tuple(static_cast<int>(reps.size()), sig[s].arity, [&](const IndexTuple& t) {
      args.clear();
      for (int b : t) args.push_back(reps[b]);
      if (limit.eval_relation(s, args)) diagram.set(s, t);
    });
  }
  return TupleTypeRecord(std::move(pattern), std::move(diagram));
}

std::vector<std::vector<int>> set_partitions(int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> rgs(k, 0);
  std::function<void(int, int)> rec = [&](int pos, int blocks) {
    if (pos == k) {
      out.push_back(rgs);
      return;
    }
    for (int b = 0; b <= blocks; ++b) {
      rgs[pos] = b;
      rec(pos + 1, std::max(blocks, b + 1));
    }
  };
  if (k > 0) rec(0, 0);
  return out;
}

std::vector<TupleTypeRecord> enumerate_types(const LimitStructure& limit, int k) {
  require_arity(k);
  std::vector<TupleTypeRecord> out;
  for (const auto& pattern : set_partitions(k)) {
    const int blocks = *std::max_element(pattern.begin(), pattern.end()) + 1;
    for (const auto& diagram : labeled_members(limit.age(), blocks)) out.emplace_back(pattern, diagram);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t count_orbits(const LimitStructure& limit, int k) { return enumerate_types(limit, k).size(); }

std::optional<std::vector<int>> find_isomorphism(const FiniteStructure& a, const FiniteStructure& b) {
  if (a.signature() != b.signature() || a.size() != b.size()) return std::nullopt;
  const int n = a.size();
  const auto& sig = a.signature();
  // Per-point invariant: occurrence counts by (symbol, argument position).
  auto invariants = [&](const FiniteStructure& s) {
    std::vector<std::vector<int>> inv(n);
    for (std::size_t sym = 0; sym < sig.size(); ++sym) {
      for (int pos = 0; pos < sig[sym].arity; ++pos) {
        std::vector<int> count(n, 0);
        for (const auto& t : s.table(sym)) ++count[t[pos]];
        for (int v = 0; v < n; ++v) inv[v].push_back(count[v]);
      }
    }
    return inv;
  };
  auto ia = invariants(a), ib = invariants(b);
  std::vector<int> image(n, -1);
  std::vector<bool> used(n, false);

  auto consistent = [&](int upto) {
    for (std::size_t s = 0; s < sig.size(); ++s) {
      bool ok = true;
      for_each_tuple(upto + 1, sig[s].arity, [&](const IndexTuple& t) {
        if (!ok || std::find(t.begin(), t.end(), upto) == t.end()) return;
        IndexTuple mapped(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) mapped[i] = image[t[i]];
        if (a.holds(s, t) != b.holds(s, mapped)) ok = false;
      });
      if (!ok) return false;
    }
    return true;
  };
  std::function<bool(int)> place = [&](int i) {
    if (i == n) return true;
    for (int v = 0; v < n; ++v) {
      if (used[v] || ia[i] != ib[v]) continue;
      image[i] = v;
      used[v] = true;
      if (consistent(i) && place(i + 1)) return true;
      used[v] = false;
    }
    image[i] = -1;
    return false;
  };
  if (!place(0)) return std::nullopt;
  return image;
}

}  // namespace canonfn
