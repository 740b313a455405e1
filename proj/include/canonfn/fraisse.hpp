#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "canonfn/rational.hpp"

namespace canonfn {

struct RelationSymbol {
  std::string name;
  int arity = 2;

  auto operator<=>(const RelationSymbol&) const = default;
};

class Signature {
public:
  Signature() = default;
  explicit Signature(std::vector<RelationSymbol> symbols);

  const std::vector<RelationSymbol>& symbols() const { return symbols_; }
  std::size_t size() const { return symbols_.size(); }
  const RelationSymbol& operator[](std::size_t i) const { return symbols_[i]; }
  std::optional<std::size_t> index_of(const std::string& name) const;

  auto operator<=>(const Signature&) const = default;

private:
  std::vector<RelationSymbol> symbols_;
};

using IndexTuple = std::vector<int>;

// A finite relational structure on {0..size-1}.
class FiniteStructure {
public:
  FiniteStructure() = default;
  FiniteStructure(Signature signature, int size);

  const Signature& signature() const { return signature_; }
  int size() const { return size_; }
  const std::set<IndexTuple>& table(std::size_t symbol) const { return tables_[symbol]; }

  bool holds(std::size_t symbol, const IndexTuple& tuple) const;
  void set(std::size_t symbol, const IndexTuple& tuple, bool value = true);

  // Substructure induced on `points`, renumbered in the given order.
  FiniteStructure induced(std::span<const int> points) const;
  // Appends an isolated point (no relations involving it).
  FiniteStructure with_point() const;

  auto operator<=>(const FiniteStructure&) const = default;

private:
  Signature signature_;
  int size_ = 0;
  std::vector<std::set<IndexTuple>> tables_;
};

enum class AgeKind { LinearOrders, Graphs, OrderedGraphs, PureSets, Forbidden, Custom };

// Membership oracle for a class of finite structures.
class AgeOracle {
public:
  using Predicate = std::function<bool(const FiniteStructure&)>;

  static AgeOracle linear_orders();
  static AgeOracle graphs();
  static AgeOracle ordered_graphs();
  static AgeOracle pure_sets();
  // Members of `base` with no induced substructure isomorphic to one of
  // `forbidden`.
  static AgeOracle forbidding(const AgeOracle& base, std::vector<FiniteStructure> forbidden, std::string name = {});
  // Arbitrary predicate. Unless declared hereditary, extension enumeration
  // falls back to unpruned search.
  static AgeOracle custom(std::string name, Signature signature, Predicate member, bool hereditary = false);

  AgeKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const Signature& signature() const { return signature_; }
  bool hereditary_trusted() const { return hereditary_; }
  // Index of a symbol interpreted as a strict linear order, if any.
  std::optional<std::size_t> order_symbol() const { return order_symbol_; }
  const std::vector<FiniteStructure>& forbidden() const { return forbidden_; }
  // Largest size of a configuration the membership test depends on: a
  // structure is a member iff all its substructures of at most this size
  // are. 0 when unknown (custom predicates).
  int local_size() const { return local_size_; }

  bool contains(const FiniteStructure& s) const;

private:
  AgeKind kind_ = AgeKind::PureSets;
  std::string name_;
  Signature signature_;
  Predicate member_;
  bool hereditary_ = true;
  std::optional<std::size_t> order_symbol_;
  std::vector<FiniteStructure> forbidden_;
  int local_size_ = 0;
};

// All members on size+1 points extending `base` with the new point last, in
// the fixed order of relation tables (see extension_tuples). Enumeration
// stops after `limit` results.
std::vector<FiniteStructure> one_point_extensions(const AgeOracle& age, const FiniteStructure& base,
                                                  std::size_t limit = static_cast<std::size_t>(-1));

// Tuples over {0..n} that contain the new point n, in the order that fixes
// the lexicographic order of extensions: grouped by the largest old index
// occurring (-1 first), then by symbol, then lexicographically.
std::vector<std::pair<std::size_t, IndexTuple>> extension_tuples(const Signature& signature, int n);

// Lexicographically least one-point extension of `base` whose restriction to
// {0..m-1, new} equals `demand` (a structure on m+1 points, new point last).
std::optional<FiniteStructure> complete_demand(const AgeOracle& age, const FiniteStructure& base,
                                               const FiniteStructure& demand);

// Every member on `size` labeled points, sorted.
const std::vector<FiniteStructure>& labeled_members(const AgeOracle& age, int size);

struct AmalgamationReport {
  bool ok = true;
  std::string violation;  // "hereditary", "amalgamation", or empty
  std::string detail;
  int hereditary_checked_up_to = 0;
};

AmalgamationReport verify_amalgamation(const AgeOracle& age, int bound);

// Elements of a limit: exact rationals for the built-in dense linear order,
// enumeration indices otherwise.
class Element {
public:
  Element() = default;
  explicit Element(Rational value) : value_(value) {}
  static Element index(std::size_t i) {
    Element e;
    e.value_ = i;
    return e;
  }

  bool is_rational() const { return std::holds_alternative<Rational>(value_); }
  const Rational& rational() const { return std::get<Rational>(value_); }
  std::size_t index_value() const { return std::get<std::size_t>(value_); }

  std::string str() const;

  auto operator<=>(const Element&) const = default;

private:
  std::variant<std::size_t, Rational> value_{std::size_t{0}};
};

// Quantifier-free type of a tuple: equality pattern (restricted growth
// string, one block index per position) and the diagram on the blocks.
class TupleTypeRecord {
public:
  TupleTypeRecord() = default;
  TupleTypeRecord(std::vector<int> pattern, FiniteStructure diagram);

  int arity() const { return static_cast<int>(pattern_.size()); }
  int block_count() const { return diagram_.size(); }
  const std::vector<int>& pattern() const { return pattern_; }
  const FiniteStructure& diagram() const { return diagram_; }

  // Does symbol hold on the positions (0-based) given?
  bool holds(std::size_t symbol, const IndexTuple& positions) const;

  // Type of (t_{sigma(0)}, ..., t_{sigma(j-1)}); sigma entries are 0-based
  // positions of this record.
  TupleTypeRecord reindex(std::span<const int> sigma) const;

  auto operator<=>(const TupleTypeRecord&) const = default;

private:
  std::vector<int> pattern_;
  FiniteStructure diagram_;
};

struct DemandRecord {
  int fragment_size = 0;        // m: demand over the first m elements
  std::size_t extension = 0;    // e: index into one_point_extensions(first m)
  std::size_t witness = 0;      // element realizing it
  bool fresh = false;           // witness added for this demand

  bool operator==(const DemandRecord&) const = default;
};

// A countable homogeneous structure presented through a fixed enumeration.
class LimitStructure {
public:
  virtual ~LimitStructure() = default;

  const AgeOracle& age() const { return age_; }
  const Signature& signature() const { return age_.signature(); }
  const std::string& name() const { return name_; }

  virtual Element element(std::size_t n) const = 0;
  virtual bool eval_relation(std::size_t symbol, std::span<const Element> tuple) const = 0;
  // Position of an element in the enumeration, if it belongs to the domain.
  virtual std::optional<std::size_t> index_of(const Element& e) const = 0;
  virtual bool is_dlo() const { return false; }

protected:
  LimitStructure(AgeOracle age, std::string name) : age_(std::move(age)), name_(std::move(name)) {}

private:
  AgeOracle age_;
  std::string name_;
};

// (Q;<) with the sign-alternating Calkin-Wilf enumeration.
class DloLimit final : public LimitStructure {
public:
  DloLimit();
  Element element(std::size_t n) const override;
  bool eval_relation(std::size_t symbol, std::span<const Element> tuple) const override;
  std::optional<std::size_t> index_of(const Element& e) const override;
  bool is_dlo() const override { return true; }
};

// Lazy Fraissé construction: the realized fragment grows on demand by
// working through the diagonal schedule of (fragment size, extension index)
// demands. Growth is serialized by a mutex.
class GenericLimit final : public LimitStructure {
public:
  GenericLimit(AgeOracle age, std::string name);

  Element element(std::size_t n) const override;
  bool eval_relation(std::size_t symbol, std::span<const Element> tuple) const override;
  std::optional<std::size_t> index_of(const Element& e) const override;

  void grow_to(std::size_t n) const;
  FiniteStructure fragment() const;
  std::vector<DemandRecord> demand_log() const;
  // One-point extensions of the fragment on the first m elements, computed
  // at least up to index e (cached; the first m elements never change).
  std::optional<FiniteStructure> demand_extension(int m, std::size_t e) const;

private:
  void grow_one() const;
  std::optional<FiniteStructure> demand_extension_locked(int m, std::size_t e) const;
  std::optional<std::size_t> satisfied_by(int m, const FiniteStructure& ext) const;

  mutable std::recursive_mutex mutex_;
  mutable FiniteStructure fragment_;
  mutable std::vector<DemandRecord> log_;
  mutable std::size_t diagonal_ = 0;
  mutable std::size_t diagonal_pos_ = 0;
  mutable std::map<int, std::vector<FiniteStructure>> extension_cache_;
  mutable std::map<int, bool> extension_complete_;
};

std::shared_ptr<GenericLimit> build_limit(const AgeOracle& age, std::size_t n);

// Built-in limits by name: dlo, rado, ordered-rado, pureset.
std::shared_ptr<const LimitStructure> builtin_limit(const std::string& name);

TupleTypeRecord qf_type(const LimitStructure& limit, std::span<const Element> tuple);

// Restricted growth strings of length k in lexicographic order.
std::vector<std::vector<int>> set_partitions(int k);

// Admissible types of arity k, sorted.
std::vector<TupleTypeRecord> enumerate_types(const LimitStructure& limit, int k);
std::size_t count_orbits(const LimitStructure& limit, int k);

// Brute-force search for a bijection between two finite structures with the
// same signature; the mapping sends points of `a` to points of `b`.
std::optional<std::vector<int>> find_isomorphism(const FiniteStructure& a, const FiniteStructure& b);

}  // namespace canonfn
