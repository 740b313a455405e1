#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "canonfn/fraisse.hpp"

namespace canonfn {

// A point acted on by a presented group: one Element for Aut(L), the
// concatenated coordinates of m base points for a Power.
struct Point {
  std::vector<Element> coords;

  Point() = default;
  explicit Point(Element e) : coords{std::move(e)} {}
  explicit Point(std::vector<Element> c) : coords(std::move(c)) {}

  std::string str() const;
  auto operator<=>(const Point&) const = default;
};

Point rational_point(const Rational& r);
Point rational_point(std::initializer_list<Rational> coords);

// Orbit invariant of a tuple of points: a quantifier-free type for Aut(L),
// one label per column for a Power. Stabilizer labels are base labels of the
// tuple extended by the constants.
struct OrbitLabel {
  std::optional<TupleTypeRecord> type;
  std::vector<OrbitLabel> columns;

  bool operator==(const OrbitLabel& o) const;
  bool operator<(const OrbitLabel& o) const;
  bool operator!=(const OrbitLabel& o) const { return !(*this == o); }
};

class GroupPresentation {
public:
  enum class Kind { AutLimit, Power, Stabilizer };

  static GroupPresentation aut(std::shared_ptr<const LimitStructure> limit);
  static GroupPresentation power(const GroupPresentation& base, int m);
  static GroupPresentation stabilizer(const GroupPresentation& base, std::vector<Point> constants);

  Kind kind() const { return node_->kind; }
  const LimitStructure& limit() const { return *node_->limit; }
  std::shared_ptr<const LimitStructure> limit_ptr() const { return node_->limit; }
  const GroupPresentation& base() const { return *node_->base; }
  int power_arity() const { return node_->m; }
  const std::vector<Point>& constants() const { return node_->constants; }

  // Coordinates per point.
  int point_arity() const { return node_->point_arity; }
  int depth() const;

  // Fixed enumeration of the domain.
  Point point(std::size_t n) const;

  OrbitLabel label(std::span<const Point> tuple) const;
  bool same_orbit(std::span<const Point> s, std::span<const Point> t) const;
  // Arity (tuple length) a label of this presentation describes.
  int label_arity(const OrbitLabel& label) const;
  OrbitLabel reindex(const OrbitLabel& label, std::span<const int> sigma) const;

  // All admissible labels of arity k, sorted.
  std::vector<OrbitLabel> enumerate_labels(int k) const;
  std::size_t count_orbits(int k) const;

  // `aut(dlo)`, `power(aut(dlo),2)`, `stab(power(aut(dlo),2); (0,1),(3,5))`.
  std::string str() const;

  // Canonical printed form of a label (`1<2=3` for dlo types, `[..][..]` for
  // powers). Round-trips through parse_label.
  std::string label_str(const OrbitLabel& label) const;
  OrbitLabel parse_label(const std::string& text) const;

  bool operator==(const GroupPresentation& o) const { return str() == o.str(); }

private:
  struct Node {
    Kind kind = Kind::AutLimit;
    std::shared_ptr<const LimitStructure> limit;
    std::shared_ptr<const GroupPresentation> base;
    int m = 1;
    std::vector<Point> constants;
    int point_arity = 1;
  };
  explicit GroupPresentation(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

// Parses the group grammar above. Structures are built-in limits by name.
GroupPresentation parse_group(const std::string& text);

// `3/4`, `v5` or `(0,1)`, matching the coordinates of g's points.
Point parse_point(const GroupPresentation& g, const std::string& text);

// Label of the type of a single tuple printed in canonical form.
std::string type_str(const LimitStructure& limit, const TupleTypeRecord& type);
TupleTypeRecord parse_type(const LimitStructure& limit, const std::string& text);

// A finite injective map between tuples of equal type, extendable one point
// at a time by the back-and-forth step that picks the enumeration-least
// admissible partner.
class PartialAutomorphism {
public:
  PartialAutomorphism(std::shared_ptr<const LimitStructure> limit, std::vector<Element> domain,
                      std::vector<Element> range, std::size_t scan_budget = 1u << 16);

  const std::vector<Element>& domain() const { return domain_; }
  const std::vector<Element>& range() const { return range_; }
  std::size_t size() const { return domain_.size(); }

  std::optional<Element> image(const Element& x) const;
  std::optional<Element> preimage(const Element& y) const;
  // Forth and back steps; return the committed partner.
  Element extend(const Element& x);
  Element extend_back(const Element& y);

  // Recomputes the certificate: domain and range have equal types.
  bool certified() const;

private:
  std::shared_ptr<const LimitStructure> limit_;
  std::vector<Element> domain_, range_;
  std::size_t scan_budget_;
};

// Certifies p (TypeMismatch if domain and range types differ).
PartialAutomorphism automorphism_extending(const GroupPresentation& g,
                                           const std::vector<std::pair<Element, Element>>& p);

}  // namespace canonfn
