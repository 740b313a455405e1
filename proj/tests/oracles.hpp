#pragma once

// Brute-force reference computations used only by tests.

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <vector>

namespace oracle {

// Weak orders on k letters: every rank assignment k -> {0..k-1}, compressed
// to dense ranks, counted once.
inline std::size_t weak_orders(int k) {
  std::set<std::vector<int>> seen;
  std::vector<int> r(k, 0);
  while (true) {
    std::vector<int> vals(r);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    std::vector<int> dense(k);
    for (int i = 0; i < k; ++i) dense[i] = int(std::lower_bound(vals.begin(), vals.end(), r[i]) - vals.begin());
    seen.insert(dense);
    int i = k - 1;
    while (i >= 0 && r[i] == k - 1) r[i--] = 0;
    if (i < 0) break;
    ++r[i];
  }
  return seen.size();
}

// Set partitions of k: every labeling k -> {0..k-1} up to renaming labels.
inline std::size_t partitions(int k) {
  std::set<std::vector<int>> seen;
  std::vector<int> r(k, 0);
  while (true) {
    std::vector<int> map(k, -1), canon(k);
    int next = 0;
    for (int i = 0; i < k; ++i) {
      if (map[r[i]] < 0) map[r[i]] = next++;
      canon[i] = map[r[i]];
    }
    seen.insert(canon);
    int i = k - 1;
    while (i >= 0 && r[i] == k - 1) r[i--] = 0;
    if (i < 0) break;
    ++r[i];
  }
  return seen.size();
}

}  // namespace oracle

namespace oracle {

// Dense rank vector of a tuple of comparable values.
template <typename T>
std::vector<int> ranks(const std::vector<T>& v) {
  std::vector<T> vals(v);
  std::sort(vals.begin(), vals.end());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  std::vector<int> out;
  for (const auto& x : v) out.push_back(int(std::lower_bound(vals.begin(), vals.end(), x) - vals.begin()));
  return out;
}

// Equality pattern (restricted growth string) of a tuple.
template <typename T>
std::vector<int> equalities(const std::vector<T>& v) {
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    int b = -1;
    for (std::size_t j = 0; j < i && b < 0; ++j)
      if (v[j] == v[i]) b = out[j];
    if (b < 0) b = out.empty() ? 0 : *std::max_element(out.begin(), out.end()) + 1;
    out.push_back(b);
  }
  return out;
}

using PatternMap = std::map<std::vector<int>, std::vector<int>>;

// Distinct well-defined pattern maps induced on tuples of arity <= k by the
// functions {0..n-1} -> {0..n-1}. `pattern` abstracts a tuple (ranks for
// chains, equalities for pure sets).
template <typename Pattern>
std::set<PatternMap> induced_pattern_maps(int n, int k, Pattern pattern) {
  std::set<PatternMap> out;
  std::vector<int> f(n, 0);
  while (true) {
    PatternMap m;
    bool ok = true;
    for (int a = 1; a <= k && ok; ++a) {
      std::vector<int> t(a, 0);
      while (ok) {
        std::vector<int> ft;
        for (int x : t) ft.push_back(f[x]);
        auto [it, fresh] = m.emplace(pattern(t), pattern(ft));
        if (!fresh && it->second != pattern(ft)) ok = false;
        int i = a - 1;
        while (i >= 0 && t[i] == n - 1) t[i--] = 0;
        if (i < 0) break;
        ++t[i];
      }
    }
    if (ok) out.insert(m);
    int i = n - 1;
    while (i >= 0 && f[i] == n - 1) f[i--] = 0;
    if (i < 0) break;
    ++f[i];
  }
  return out;
}

}  // namespace oracle
