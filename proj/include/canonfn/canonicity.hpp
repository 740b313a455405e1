#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "canonfn/behaviors.hpp"
#include "canonfn/groups.hpp"

namespace canonfn {

// One affine piece x -> slope*x + offset on an interval of Q.
struct AffinePiece {
  std::optional<Rational> lo, hi;  // missing = infinite
  bool lo_closed = false, hi_closed = false;
  Rational slope{1}, offset{0};

  bool contains(const Rational& x) const;
  Rational apply(const Rational& x) const { return slope * x + offset; }
  std::string str() const;  // `[0,inf):x*2+1`
};

// A function between presented domains, possibly partial.
class FunctionOracle {
public:
  using Eval = std::function<std::optional<Point>(const Point&)>;

  FunctionOracle(std::string name, Eval eval) : name_(std::move(name)), eval_(std::move(eval)) {}

  const std::string& name() const { return name_; }
  std::optional<Point> try_eval(const Point& x) const { return eval_(x); }
  // Throws DomainGap where undefined.
  Point operator()(const Point& x) const;
  std::vector<Point> apply(std::span<const Point> xs) const;

  // Throws std::invalid_argument if two pairs disagree.
  static FunctionOracle table(std::vector<std::pair<Point, Point>> pairs, std::string name = "table");
  static FunctionOracle identity();
  static FunctionOracle negation();
  static FunctionOracle constant(const Rational& c);
  // Pieces must cover Q with pairwise disjoint intervals.
  static FunctionOracle pieces(std::vector<AffinePiece> pieces);
  // outer(inner(x)).
  static FunctionOracle compose(const FunctionOracle& outer, const FunctionOracle& inner);
  // m-ary functions on power points.
  static FunctionOracle minimum(int m);
  static FunctionOracle projection(int i, int m);
  // The map of a partial automorphism, extended on demand by forth steps.
  static FunctionOracle partial_automorphism(std::shared_ptr<PartialAutomorphism> a);

private:
  std::string name_;
  Eval eval_;
};

// `x*-1`, `x`, `2*x+1/2`, `-x+3`, `5/2`.
std::pair<Rational, Rational> parse_affine(const std::string& text);
// `pieces:[(-inf,0):x*-1; [0,inf):x]` without the prefix.
std::vector<AffinePiece> parse_pieces(const std::string& text);

// Lines `x -> y` with points in the source/target formats.
FunctionOracle parse_function_table(const std::string& text, const GroupPresentation& source,
                                    const GroupPresentation& target);
std::string function_table_str(const std::vector<std::pair<Point, Point>>& pairs);

struct Counterexample {
  std::vector<Point> s, t;  // same source label
  OrbitLabel source_label;
  OrbitLabel image_label_s, image_label_t;
};

struct CanonicalUpTo {
  std::size_t horizon = 0;
  int arity = 0;
  BehaviorTable behavior;
};

using CanonicityVerdict = std::variant<CanonicalUpTo, Counterexample>;

// Tuples of arity 1..k over `domain` in order (arity, index tuple); the first
// t whose image label differs from that of the first s with t's source label
// gives the counterexample (s, t).
CanonicityVerdict check_canonical(const FunctionOracle& f, const GroupPresentation& g, const GroupPresentation& h,
                                  const std::vector<Point>& domain, int k);
// Domain = the first n points of g.
CanonicityVerdict check_canonical(const FunctionOracle& f, const GroupPresentation& g, const GroupPresentation& h,
                                  std::size_t n, int k);

// Recomputes a counterexample from scratch.
bool verify_counterexample(const FunctionOracle& f, const GroupPresentation& g, const GroupPresentation& h,
                           const Counterexample& c);

// Throws NotCanonical carrying the counterexample.
BehaviorTable behavior_of(const FunctionOracle& f, const GroupPresentation& g, const GroupPresentation& h,
                          std::size_t n, int k);

std::string verdict_str(const CanonicityVerdict& v, const GroupPresentation& g, const GroupPresentation& h);

bool local_equal(const FunctionOracle& f, const FunctionOracle& g, const std::vector<Point>& points,
                 const GroupPresentation& h);

// Level l covers the first l domain points. `joint` is the label of the
// concatenated f-blocks; `blocks[i]` the label of the i-th g-block, which the
// alignment e_i sends onto the i-th f-block.
struct TowerLevel {
  std::vector<Point> points;
  OrbitLabel joint;
  std::vector<OrbitLabel> blocks;
};

struct TowerWitness {
  std::size_t pairs = 0;
  std::vector<TowerLevel> levels;
};

struct LocalFailure {
  std::size_t pair = 0;
  std::vector<Point> points;
};

using TowerResult = std::variant<TowerWitness, LocalFailure>;

TowerResult tower_witness(const std::vector<std::pair<FunctionOracle, FunctionOracle>>& pairs,
                          const GroupPresentation& h, const std::vector<Point>& domain);
TowerResult tower_witness(const std::vector<std::pair<FunctionOracle, FunctionOracle>>& pairs,
                          const GroupPresentation& h, const GroupPresentation& g, std::size_t depth);

// Re-derives level coherence and block alignment through reindex alone.
bool check_tower(const TowerWitness& w, const GroupPresentation& h);

// One seed pair (s, t) of same-label tuples, standing for an alpha with
// alpha(s) = t.
struct HarnessSample {
  std::vector<Point> s, t;
  std::vector<Point> support;  // distinct points of s in domain order
  bool local_ok = true;        // proxy 2
  TowerResult tower;           // proxy 3 over the support
};

struct HarnessReport {
  CanonicityVerdict proxy1;
  bool proxy2 = true, proxy3 = true;
  std::vector<HarnessSample> samples;
  std::optional<std::size_t> first_failure;  // into samples
  bool agree = true;                          // all pass or all fail
  bool witnesses_match = true;
  std::string discrepancy;
};

// Alphas are drawn from the seed pairs scanned by check_canonical: for each
// tuple t, the first earlier s with the same source label. For aut(...)
// sources each seed is certified through automorphism_extending.
HarnessReport proposition_harness(const FunctionOracle& f, const GroupPresentation& g, const GroupPresentation& h,
                                  std::size_t n, int k);

}  // namespace canonfn
