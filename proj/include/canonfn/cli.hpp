#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "canonfn/canonicity.hpp"
#include "canonfn/fraisse.hpp"
#include "canonfn/groups.hpp"

namespace canonfn {

struct CommandSpec {
  std::string verb;
  std::map<std::string, std::string> options;  // flag name without dashes -> value
  std::vector<std::string> arguments;          // positional (orbits/limit structure)
  std::optional<std::string> help;             // set when --help was given

  bool has(const std::string& key) const { return options.count(key) != 0; }
};

// Validates flags against the verb's schema and every typed value (integers,
// rationals, group and oracle strings) before anything runs. UsageError
// positions are argv indices, counting the verb as 0.
CommandSpec parse_command(const std::vector<std::string>& args);

struct RunOutput {
  int exit_code = 0;  // 0 definite, 2 inconclusive, 1 error
  std::string report;
};

RunOutput run(const CommandSpec& spec);

struct RunRecord {
  std::string command;
  std::string version;
  double wall_seconds = 0;
  std::string digest;  // FNV-1a 64 of the report
};

RunRecord make_record(const std::vector<std::string>& args, const std::string& report,
                      std::chrono::steady_clock::duration wall);
std::string record_str(const RunRecord& r);

// Oracle strings: id, neg, pham, min, min:m, proj:i (1-based), const:p/q,
// pieces:[...], compose(a,b), table:<file>.
struct OracleExpr {
  std::string kind;
  std::string argument;
  std::vector<OracleExpr> children;
};

// UsageError positions are character offsets into `text`.
OracleExpr parse_oracle_expr(const std::string& text);
// `min` and `proj` take their arity from the source points; table files are
// read relative to the working directory.
FunctionOracle build_oracle(const OracleExpr& e, const GroupPresentation& source, const GroupPresentation& target);

// `graphs`, `linear-orders`, `ordered-graphs`, `pure-sets`, or
// `forbidden:<file>`.
AgeOracle parse_age_spec(const std::string& text);
// Optional `base <age>` line (default graphs), then one forbidden structure
// per line: `size k; R(i,j); ...`. Graph edges are symmetrized.
AgeOracle parse_forbidden_age(const std::string& text, const std::string& name);

// `dlo`, `rado`, `ordered-rado`, `pureset`, `builtin:<name>`, or
// `forbidden:<file>`.
std::shared_ptr<const LimitStructure> parse_structure_spec(const std::string& text);

// `signature: <,E/2`-style header, `size: n`, then one `R(i,j)` line per tuple.
std::string structure_str(const FiniteStructure& s);
FiniteStructure parse_structure(const std::string& text);

// Tables separated by `---` lines.
std::string behaviors_str(const std::vector<BehaviorTable>& tables);
std::vector<BehaviorTable> parse_behaviors(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace canonfn
