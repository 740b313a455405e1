#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "canonfn/canonicity.hpp"

namespace canonfn {

struct CanonizeOptions {
  std::optional<std::vector<Point>> domain;  // default: first `depth` points of g
  std::optional<std::vector<Point>> pool;    // default: first `horizon` points of g
  // Images forced for the leading domain points (constants).
  std::size_t fixed_prefix = 0;
  // Search nodes before giving up; 0 means unlimited.
  std::size_t node_budget = 20'000'000;
};

struct CanonicalApproximation {
  BehaviorTable behavior;
  // Level l of the embedding tower is the first l entries.
  std::vector<std::pair<Point, Point>> tower;   // x -> alpha(x)
  std::vector<std::pair<Point, Point>> sample;  // x -> f(alpha(x))
  CanonicalUpTo certificate;
};

struct HorizonExhausted {
  std::size_t nodes = 0;
  std::string reason;
};

using CanonizeResult = std::variant<CanonicalApproximation, HorizonExhausted>;

// Depth-first search for a type-preserving tower alpha on the domain, images
// tried in pool order, such that f o alpha induces a conflict-free behavior
// on all tuples of arity up to k. The first tower found is returned.
CanonizeResult canonize(const FunctionOracle& f, const GroupPresentation& g, const GroupPresentation& h, int k,
                        std::size_t depth, std::size_t horizon, const CanonizeOptions& options = {});

// f is m-ary over dlo. The source is power(aut(dlo), m) (aut(dlo) for m = 1)
// stabilizing the constants, the target aut(dlo) stabilizing their images;
// the constants lead the domain and are fixed by the tower.
CanonizeResult canonize_with_constants(const FunctionOracle& f, int m, const std::vector<Point>& constants, int k,
                                       std::size_t depth, std::size_t horizon);

// The presentations canonize_with_constants works with.
std::pair<GroupPresentation, GroupPresentation> constant_groups(const FunctionOracle& f, int m,
                                                                const std::vector<Point>& constants);

std::string canonize_str(const CanonizeResult& r);

// Lexicographically least m-subset of {1..n} whose pairs share one color
// under color(i, j), i < j.
std::optional<std::vector<int>> mono_subset(int n, const std::function<int(int, int)>& color, int m);

}  // namespace canonfn
