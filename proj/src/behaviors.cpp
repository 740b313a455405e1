#include "canonfn/behaviors.hpp"

#include <functional>
#include <sstream>

#include "canonfn/errors.hpp"

namespace canonfn {

const OrbitLabel* BehaviorTable::lookup(const OrbitLabel& label) const {
  const int k = source.label_arity(label);
  if (k < 1 || k > max_arity) return nullptr;
  auto it = maps[k - 1].find(label);
  return it == maps[k - 1].end() ? nullptr : &it->second;
}

std::size_t BehaviorTable::entry_count() const {
  std::size_t n = 0;
  for (const auto& m : maps) n += m.size();
  return n;
}

bool BehaviorTable::total() const {
  for (int k = 1; k <= max_arity; ++k)
    for (const auto& l : source.enumerate_labels(k))
      if (!maps[k - 1].count(l)) return false;
  return true;
}

bool BehaviorTable::operator==(const BehaviorTable& o) const {
  return source == o.source && target == o.target && max_arity == o.max_arity && maps == o.maps;
}

std::vector<std::vector<int>> index_maps(int j, int k) {
  std::vector<std::vector<int>> out;
  if (k < 1) return out;
  std::vector<int> s(j, 0);
  while (true) {
    out.push_back(s);
    int i = j - 1;
    while (i >= 0 && s[i] == k - 1) s[i--] = 0;
    if (i < 0) break;
    ++s[i];
  }
  return out;
}

namespace {

// All index maps into {1..k} from arities 1..max, ordered by (j, sigma).
std::vector<std::vector<int>> maps_into(int k, int max) {
  std::vector<std::vector<int>> out;
  for (int j = 1; j <= max; ++j)
    for (auto& s : index_maps(j, k)) out.push_back(std::move(s));
  return out;
}

std::string sigma_str(const std::vector<int>& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i] + 1);
  return out + ")";
}

}  // namespace

std::optional<CoherenceViolation> coherence_check(const BehaviorTable& b) {
  for (int k = 1; k <= b.max_arity; ++k) {
    const auto& bk = b.maps[k - 1];
    for (const auto& sigma : maps_into(k, b.max_arity)) {
      for (const auto& [tau, image] : bk) {
        auto sub = b.source.reindex(tau, sigma);
        const OrbitLabel* lhs = b.lookup(sub);
        if (!lhs) continue;
        auto rhs = b.target.reindex(image, sigma);
        if (*lhs != rhs) {
          return CoherenceViolation{k, sigma, tau,
                                    "B(" + b.source.label_str(sub) + ") = " + b.target.label_str(*lhs) +
                                        " but reindexing B(" + b.source.label_str(tau) + ") along " +
                                        sigma_str(sigma) + " gives " + b.target.label_str(rhs)};
        }
      }
    }
  }
  return std::nullopt;
}

std::vector<BehaviorTable> enumerate_behaviors(const GroupPresentation& source, const GroupPresentation& target,
                                               int k) {
  require_arity(k);
  std::vector<std::vector<OrbitLabel>> src(k), tgt(k);
  for (int a = 1; a <= k; ++a) {
    src[a - 1] = source.enumerate_labels(a);
    tgt[a - 1] = target.enumerate_labels(a);
  }
  // Slots in assignment order; a slot is checked against every assigned
  // entry it shares a reindexing constraint with.
  std::vector<std::pair<int, const OrbitLabel*>> slots;
  for (int a = 1; a <= k; ++a)
    for (const auto& l : src[a - 1]) slots.emplace_back(a, &l);

  std::vector<std::vector<std::vector<int>>> sigmas(k + 1);
  for (int a = 1; a <= k; ++a) sigmas[a] = maps_into(a, k);

  BehaviorTable work(source, target, k);
  std::vector<BehaviorTable> out;

  auto consistent = [&](int a, const OrbitLabel& tau, const OrbitLabel& image) {
    // As the larger side: tau reindexed to smaller or equal assigned arities.
    for (const auto& sigma : sigmas[a]) {
      const OrbitLabel* lhs = work.lookup(source.reindex(tau, sigma));
      if (lhs && *lhs != target.reindex(image, sigma)) return false;
    }
    // As the reindexed side: assigned labels of any arity that reindex onto tau.
    for (int b = 1; b <= k; ++b) {
      for (const auto& sigma : index_maps(a, b)) {
        for (const auto& [rho, rho_image] : work.maps[b - 1]) {
          if (source.reindex(rho, sigma) != tau) continue;
          if (target.reindex(rho_image, sigma) != image) return false;
        }
      }
    }
    return true;
  };

  std::function<void(std::size_t)> descend = [&](std::size_t i) {
    if (i == slots.size()) {
      out.push_back(work);
      return;
    }
    const auto [a, tau] = slots[i];
    auto& bucket = work.maps[a - 1];
    for (const auto& image : tgt[a - 1]) {
      // The self-constraint (sigma into arity a) needs the entry present.
      bucket[*tau] = image;
      if (consistent(a, *tau, image)) descend(i + 1);
      bucket.erase(*tau);
    }
  };
  descend(0);
  return out;
}

std::optional<BehaviorWitness> realize_behavior(const BehaviorTable& b, std::size_t n, std::size_t ratio) {
  const std::size_t pool = n * ratio;
  std::vector<Point> domain, targets;
  for (std::size_t i = 0; i < n; ++i) domain.push_back(b.source.point(i));
  for (std::size_t i = 0; i < pool; ++i) targets.push_back(b.target.point(i));

  std::vector<std::size_t> choice(n);
  // Tuples of arity <= K over {0..i} that use i.
  auto tuples_through = [&](int i) {
    std::vector<std::vector<int>> out;
    for (int a = 1; a <= b.max_arity; ++a)
      for (auto& s : index_maps(a, i + 1))
        if (std::find(s.begin(), s.end(), i) != s.end()) out.push_back(std::move(s));
    return out;
  };

  std::function<bool(std::size_t)> descend = [&](std::size_t i) {
    if (i == n) return true;
    const auto tuples = tuples_through(static_cast<int>(i));
    std::vector<const OrbitLabel*> wanted;
    for (const auto& t : tuples) {
      std::vector<Point> st;
      for (int v : t) st.push_back(domain[v]);
      const OrbitLabel* w = b.lookup(b.source.label(st));
      if (!w) return false;
      wanted.push_back(w);
    }
    for (std::size_t c = 0; c < pool; ++c) {
      choice[i] = c;
      bool ok = true;
      for (std::size_t q = 0; q < tuples.size() && ok; ++q) {
        std::vector<Point> it;
        for (int v : tuples[q]) it.push_back(targets[choice[v]]);
        ok = b.target.label(it) == *wanted[q];
      }
      if (ok && descend(i + 1)) return true;
    }
    return false;
  };
  if (!descend(0)) return std::nullopt;
  BehaviorWitness w;
  w.domain = domain;
  w.image_indices = choice;
  for (auto c : choice) w.images.push_back(targets[c]);
  return w;
}

std::string behavior_str(const BehaviorTable& b) {
  std::ostringstream out;
  out << "source: " << b.source.str() << "\n";
  out << "target: " << b.target.str() << "\n";
  out << "arity: " << b.max_arity << "\n";
  for (int k = 1; k <= b.max_arity; ++k)
    for (const auto& [from, to] : b.maps[k - 1])
      out << k << ": " << b.source.label_str(from) << " -> " << b.target.label_str(to) << "\n";
  return out.str();
}

namespace {

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  auto z = s.find_last_not_of(" \t\r");
  return s.substr(a, z - a + 1);
}

}  // namespace

BehaviorTable parse_behavior(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  std::optional<GroupPresentation> source, target;
  std::optional<BehaviorTable> table;
  std::optional<int> arity;

  auto header = [&](const std::string& line, const std::string& key) -> std::optional<std::string> {
    if (line.rfind(key + ":", 0) != 0) return std::nullopt;
    return trim(line.substr(key.size() + 1));
  };

  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    try {
      if (auto v = header(line, "source")) {
        source = parse_group(*v);
        continue;
      }
      if (auto v = header(line, "target")) {
        target = parse_group(*v);
        continue;
      }
      if (auto v = header(line, "arity")) {
        arity = std::stoi(*v);
        if (*arity < 1) throw FormatError(line_no, "arity must be positive");
        continue;
      }
    } catch (const UsageError& e) {
      throw FormatError(line_no, e.what());
    } catch (const std::invalid_argument&) {
      throw FormatError(line_no, "bad arity '" + line + "'");
    }
    if (!source || !target || !arity) throw FormatError(line_no, "entry before the source/target/arity headers");
    if (!table) table.emplace(*source, *target, *arity);

    auto colon = line.find(':');
    auto arrow = line.find("->");
    if (colon == std::string::npos || arrow == std::string::npos || arrow < colon)
      throw FormatError(line_no, "expected 'k: <source-label> -> <target-label>'");
    int k = 0;
    try {
      k = std::stoi(line.substr(0, colon));
    } catch (const std::exception&) {
      throw FormatError(line_no, "bad arity prefix");
    }
    if (k < 1 || k > *arity) throw FormatError(line_no, "entry arity out of range");
    OrbitLabel from, to;
    try {
      from = source->parse_label(trim(line.substr(colon + 1, arrow - colon - 1)));
      to = target->parse_label(trim(line.substr(arrow + 2)));
    } catch (const std::exception& e) {
      throw FormatError(line_no, e.what());
    }
    if (source->label_arity(from) != k || target->label_arity(to) != k)
      throw FormatError(line_no, "label arity differs from the entry arity");
    if (!table->maps[k - 1].emplace(from, to).second) throw FormatError(line_no, "duplicate entry");
  }
  if (!source || !target || !arity) throw FormatError(line_no, "missing source/target/arity header");
  if (!table) table.emplace(*source, *target, *arity);
  return *table;
}

}  // namespace canonfn
