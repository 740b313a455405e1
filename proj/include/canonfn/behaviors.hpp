#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "canonfn/groups.hpp"

namespace canonfn {

// Per-arity maps from source orbit labels to target orbit labels. Tables
// observed at a finite horizon may be partial.
struct BehaviorTable {
  GroupPresentation source;
  GroupPresentation target;
  int max_arity = 1;
  std::vector<std::map<OrbitLabel, OrbitLabel>> maps;  // maps[k - 1] is B_k

  BehaviorTable(GroupPresentation src, GroupPresentation tgt, int k)
      : source(std::move(src)), target(std::move(tgt)), max_arity(k), maps(k) {}

  const OrbitLabel* lookup(const OrbitLabel& label) const;
  std::size_t entry_count() const;
  // Total on the admissible source labels of every arity up to max_arity.
  bool total() const;

  bool operator==(const BehaviorTable& o) const;
};

// Index maps sigma: {1..j} -> {1..k}, 0-based, in lexicographic order.
std::vector<std::vector<int>> index_maps(int j, int k);

struct CoherenceViolation {
  int k = 0;                // arity of the violated source label
  std::vector<int> sigma;   // 0-based, length j
  OrbitLabel label;         // source label of arity k
  std::string detail;
};

// First violation of B_j(reindex(t, s)) = reindex(B_k(t), s) in (k, s, t)
// order; entries absent from a partial table are skipped.
std::optional<CoherenceViolation> coherence_check(const BehaviorTable& b);

// Every coherent total table up to arity k, ordered by map graphs.
std::vector<BehaviorTable> enumerate_behaviors(const GroupPresentation& source, const GroupPresentation& target,
                                               int k);

struct BehaviorWitness {
  std::vector<Point> domain;
  std::vector<Point> images;
  std::vector<std::size_t> image_indices;  // positions in the target enumeration
};

// Least map (by target enumeration indices) from the first n source points
// into the first ratio*n target points that induces b on all tuples of arity
// up to b.max_arity. nullopt means the horizon was exhausted.
std::optional<BehaviorWitness> realize_behavior(const BehaviorTable& b, std::size_t n, std::size_t ratio = 8);

// `source: ...`, `target: ...`, `arity: K`, then `k: <src> -> <tgt>` lines.
std::string behavior_str(const BehaviorTable& b);
BehaviorTable parse_behavior(const std::string& text);

}  // namespace canonfn
