#include "canonfn/canonize.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "canonfn/errors.hpp"

namespace canonfn {

namespace {

struct Search {
  const FunctionOracle& f;
  const GroupPresentation& g;
  const GroupPresentation& h;
  int k;
  std::vector<Point> domain, pool;
  std::size_t fixed_prefix;
  std::size_t budget;

  // Per level: tuples over the first l+1 domain points that use point l,
  // with their source labels.
  std::vector<std::vector<std::pair<std::vector<int>, OrbitLabel>>> tuples{};
  std::vector<OrbitLabel> prefix_labels{};
  std::vector<std::optional<Point>> pool_images{};

  std::vector<std::size_t> choice{};
  std::vector<Point> alpha{}, images{};
  std::map<OrbitLabel, std::pair<OrbitLabel, int>> behavior{};  // label -> (image label, uses)
  std::size_t nodes = 0;
  bool out_of_budget = false;

  const Point& image_of(std::size_t c) {
    if (!pool_images[c]) pool_images[c] = f(pool[c]);
    return *pool_images[c];
  }

  void prepare() {
    tuples.resize(domain.size());
    for (std::size_t l = 0; l < domain.size(); ++l) {
      std::vector<Point> prefix(domain.begin(), domain.begin() + l + 1);
      prefix_labels.push_back(g.label(prefix));
      for (int a = 1; a <= k; ++a)
        for (auto& t : index_maps(a, static_cast<int>(l) + 1)) {
          if (std::find(t.begin(), t.end(), static_cast<int>(l)) == t.end()) continue;
          std::vector<Point> pts;
          for (int i : t) pts.push_back(domain[i]);
          auto label = g.label(pts);
          tuples[l].emplace_back(std::move(t), std::move(label));
        }
    }
    pool_images.resize(pool.size());
  }

  // Adds the behavior entries of level l; on conflict undoes them.
  bool add_level(std::size_t l) {
    std::vector<const OrbitLabel*> added;
    for (const auto& [t, src] : tuples[l]) {
      std::vector<Point> img;
      for (int i : t) img.push_back(images[i]);
      auto tgt = h.label(img);
      auto it = behavior.find(src);
      if (it == behavior.end()) {
        it = behavior.emplace(src, std::pair{std::move(tgt), 0}).first;
      } else if (it->second.first != tgt) {
        for (auto* a : added) release(*a);
        return false;
      }
      ++it->second.second;
      added.push_back(&it->first);
    }
    return true;
  }

  void release(const OrbitLabel& src) {
    auto it = behavior.find(src);
    if (--it->second.second == 0) behavior.erase(it);
  }

  void remove_level(std::size_t l) {
    for (const auto& [t, src] : tuples[l]) release(src);
  }

  bool descend(std::size_t l) {
    if (l == domain.size()) return true;
    for (std::size_t c = 0; c < pool.size(); ++c) {
      if (l < fixed_prefix && pool[c] != domain[l]) continue;
      if (budget && ++nodes > budget) {
        out_of_budget = true;
        return false;
      }
      alpha.push_back(pool[c]);
      if (g.label(alpha) == prefix_labels[l]) {
        images.push_back(image_of(c));
        if (add_level(l)) {
          choice.push_back(c);
          if (descend(l + 1)) return true;
          choice.pop_back();
          remove_level(l);
        }
        images.pop_back();
      }
      alpha.pop_back();
      if (out_of_budget) return false;
    }
    return false;
  }
};

}  // namespace

CanonizeResult canonize(const FunctionOracle& f, const GroupPresentation& g, const GroupPresentation& h, int k,
                        std::size_t depth, std::size_t horizon, const CanonizeOptions& options) {
  require_arity(k);
  Search s{f, g, h, k, {}, {}, options.fixed_prefix, options.node_budget};
  if (options.domain) {
    s.domain = *options.domain;
  } else {
    for (std::size_t i = 0; i < depth; ++i) s.domain.push_back(g.point(i));
  }
  if (options.pool) {
    s.pool = *options.pool;
  } else {
    for (std::size_t i = 0; i < horizon; ++i) s.pool.push_back(g.point(i));
  }
  for (std::size_t i = 0; i < s.fixed_prefix && i < s.domain.size(); ++i)
    if (std::find(s.pool.begin(), s.pool.end(), s.domain[i]) == s.pool.end()) s.pool.push_back(s.domain[i]);
  s.prepare();
  if (!s.descend(0)) {
    if (s.out_of_budget)
      return HorizonExhausted{s.nodes, "node budget of " + std::to_string(s.budget) + " exhausted"};
    return HorizonExhausted{s.nodes, "no admissible tower within " + std::to_string(s.pool.size()) + " candidates"};
  }

  std::vector<std::pair<Point, Point>> tower, sample;
  for (std::size_t i = 0; i < s.domain.size(); ++i) {
    tower.emplace_back(s.domain[i], s.alpha[i]);
    sample.emplace_back(s.domain[i], s.images[i]);
  }
  auto verdict = check_canonical(FunctionOracle::table(sample, "sample"), g, h, s.domain, k);
  if (!std::holds_alternative<CanonicalUpTo>(verdict))
    throw std::logic_error("canonize produced a sample that is not canonical");
  auto certificate = std::get<CanonicalUpTo>(verdict);
  return CanonicalApproximation{certificate.behavior, std::move(tower), std::move(sample), std::move(certificate)};
}

std::pair<GroupPresentation, GroupPresentation> constant_groups(const FunctionOracle& f, int m,
                                                                const std::vector<Point>& constants) {
  auto dlo = GroupPresentation::aut(builtin_limit("dlo"));
  auto source = m == 1 ? dlo : GroupPresentation::power(dlo, m);
  if (constants.empty()) return {source, dlo};
  return {GroupPresentation::stabilizer(source, constants),
          GroupPresentation::stabilizer(dlo, f.apply(constants))};
}

CanonizeResult canonize_with_constants(const FunctionOracle& f, int m, const std::vector<Point>& constants, int k,
                                       std::size_t depth, std::size_t horizon) {
  auto [g, h] = constant_groups(f, m, constants);
  CanonizeOptions options;
  std::vector<Point> domain = constants;
  domain.erase(std::unique(domain.begin(), domain.end()), domain.end());
  options.fixed_prefix = domain.size();
  for (std::size_t i = 0; domain.size() < options.fixed_prefix + depth; ++i) {
    Point p = g.point(i);
    if (std::find(domain.begin(), domain.end(), p) == domain.end()) domain.push_back(p);
  }
  options.domain = domain;
  return canonize(f, g, h, k, domain.size(), horizon, options);
}

std::string canonize_str(const CanonizeResult& r) {
  std::ostringstream out;
  if (const auto* e = std::get_if<HorizonExhausted>(&r)) {
    out << "result: horizon-exhausted\n";
    out << "nodes: " << e->nodes << "\n";
    out << "reason: " << e->reason << "\n";
    return out.str();
  }
  const auto& a = std::get<CanonicalApproximation>(r);
  out << "result: canonical-approximation\n";
  out << behavior_str(a.behavior);
  out << "tower:\n";
  for (const auto& [x, y] : a.tower) out << "  " << x.str() << " -> " << y.str() << "\n";
  out << "sample:\n";
  for (const auto& [x, y] : a.sample) out << "  " << x.str() << " -> " << y.str() << "\n";
  return out.str();
}

std::optional<std::vector<int>> mono_subset(int n, const std::function<int(int, int)>& color, int m) {
  if (m <= 0) return std::vector<int>{};
  std::vector<int> chosen;
  std::optional<int> shade;
  std::function<bool(int)> descend = [&](int from) {
    if (static_cast<int>(chosen.size()) == m) return true;
    for (int v = from; v <= n - (m - static_cast<int>(chosen.size())) + 1; ++v) {
      bool fresh_shade = false;
      bool ok = true;
      for (int u : chosen) {
        int c = color(u, v);
        if (!shade) {
          shade = c;
          fresh_shade = true;
        } else if (c != *shade) {
          ok = false;
          break;
        }
      }
      if (ok) {
        chosen.push_back(v);
        if (descend(v + 1)) return true;
        chosen.pop_back();
      }
      if (fresh_shade) shade.reset();
    }
    return false;
  };
  if (descend(1)) return chosen;
  return std::nullopt;
}

}  // namespace canonfn
