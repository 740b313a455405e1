#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "canonfn/canonicity.hpp"
#include "canonfn/rational.hpp"

namespace canonfn {

// A subset of Q given by a membership test and an enumeration of exactly its
// members.
struct ComputableDenseSet {
  using Bound = std::optional<Rational>;

  std::string name;
  std::function<bool(const Rational&)> member;
  std::function<Rational(std::size_t)> element;
  // Position in the enumeration; nullopt when it is out of reach.
  std::function<std::optional<std::size_t>(const Rational&)> index_of;
  // Enumeration-least member of the open interval, if one exists.
  std::function<std::optional<Rational>(const Bound&, const Bound&)> least_in;

  static ComputableDenseSet rationals();               // "q"
  static ComputableDenseSet rationals_without_zero();  // "q-minus-0"
  // Generic set: least_in and index_of scan the first `scan` members.
  static ComputableDenseSet scanned(std::string name, std::function<bool(const Rational&)> member,
                                    std::function<Rational(std::size_t)> element, std::size_t scan = 1u << 14);
  static ComputableDenseSet by_name(const std::string& name);

  bool before(const Rational& x, const Rational& y) const;  // enumeration order
};

// Samples density (a member between consecutive members among the first
// `samples`) and unboundedness; throws DensityProbeFailure.
void probe_density(const ComputableDenseSet& s, std::size_t samples = 16, std::size_t budget = 4096);

// Canonical back-and-forth isomorphism between two countable dense sets
// without endpoints. Stages alternate, forth first: the least uncommitted
// source member is matched with the enumeration-least admissible target
// member, then symmetrically. Seeds are committed before stage 0.
class BackAndForthMap {
public:
  BackAndForthMap(ComputableDenseSet source, ComputableDenseSet target,
                  std::vector<std::pair<Rational, Rational>> seeds = {}, std::size_t max_stages = 1u << 22);

  const ComputableDenseSet& source() const { return source_; }
  const ComputableDenseSet& target() const { return target_; }

  // Runs stages until x (resp. y) is committed. DomainGap for non-members,
  // BudgetExhausted past max_stages.
  Rational eval(const Rational& x);
  Rational inverse(const Rational& y);
  void run_stages(std::size_t count);

  std::size_t stages() const;
  std::vector<std::pair<Rational, Rational>> commitments() const;  // commit order
  // Committed pairs form a strictly increasing injection.
  bool sound() const;

private:
  void stage();
  void commit(const Rational& x, const Rational& y);

  ComputableDenseSet source_, target_;
  std::size_t max_stages_;
  mutable std::recursive_mutex mutex_;
  std::map<Rational, Rational> forth_, back_;
  std::vector<std::pair<Rational, Rational>> log_;
  std::size_t stages_ = 0;
  std::size_t next_source_ = 0, next_target_ = 0;
};

// Function oracles over single rational points; they keep the map alive.
FunctionOracle map_oracle(std::shared_ptr<BackAndForthMap> m, std::string name);
FunctionOracle inverse_map_oracle(std::shared_ptr<BackAndForthMap> m, std::string name);

// Probes both sets for density first (DensityProbeFailure).
std::shared_ptr<BackAndForthMap> canonical_iso(const ComputableDenseSet& source, const ComputableDenseSet& target);
std::shared_ptr<BackAndForthMap> automorphism_moving(const Rational& a, const Rational& b);

struct CutBracket {
  Rational lo, hi;      // sup of g below the cut, inf of g above it
  Rational x_lo, x_hi;  // probes attaining them
  std::size_t probes = 0;
};

// Probes x along the enumeration of Q (first `budget` elements). Among probes
// with f(x) < cut tracks the largest g(x), among f(x) > cut the smallest.
// Returns once hi - lo < epsilon; nullopt when the budget runs out first.
std::optional<CutBracket> forced_cut(const FunctionOracle& f, const FunctionOracle& g, const Rational& cut,
                                     const Rational& epsilon, std::size_t budget);

struct ObstructionCertificate {
  Rational epsilon;
  Rational a, alpha_a, f_a, f_alpha_a;          // f(a) < 0 < f(alpha(a))
  CutBracket cut;                               // bracket for e at 0
  Rational f_cut_lo, f_cut_hi;                  // f at the bracket probes
  Rational x1, y1, e_y1, x2, y2, e_y2;          // y = f(x), e(y) = f(alpha(x)) within epsilon of 0
};

// One named inequality per line of the certificate, recomputed exactly.
struct CertificateCheck {
  std::vector<std::pair<std::string, bool>> claims;
  bool ok() const;
};

// Builds f = canonical_iso(Q, Q minus 0), a with f(a) < 0 (least probe), alpha
// moving a to the least probe b with f(b) > 0, the cut bracket at 0 for
// e o f = f o alpha, and x1, x2 pulled back from the enumeration-least
// targets in (-epsilon, 0) and (0, epsilon). Throws BudgetExhausted when a, b
// or the bracket need more than `budget` probes, or the maps run out of stages.
ObstructionCertificate pham_refute(const Rational& epsilon, std::size_t budget);

// Recomputes every claim, re-deriving f and alpha from scratch.
CertificateCheck check_certificate(const ObstructionCertificate& c);

std::string certificate_str(const ObstructionCertificate& c);
ObstructionCertificate parse_certificate(const std::string& text);

}  // namespace canonfn
