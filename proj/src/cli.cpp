#include "canonfn/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "canonfn/behaviors.hpp"
#include "canonfn/canonize.hpp"
#include "canonfn/errors.hpp"
#include "canonfn/symbolic_dlo.hpp"

namespace canonfn {

namespace {

constexpr const char* kVersion = "canonfn 0.1.0";

enum class Kind { Int, Rational, Group, Oracle, Path, Text };

struct Flag {
  std::string name;
  Kind kind;
  std::string help;
  std::optional<std::string> fallback;  // default value; required when absent
  bool optional = false;                // neither required nor defaulted
};

struct VerbSchema {
  std::string verb;
  std::string help;
  std::vector<Flag> flags;
  bool positional = false;  // one optional structure argument
};

const std::vector<VerbSchema>& schemas() {
  static const std::vector<VerbSchema> s = {
      {"orbits",
       "Count orbits of k-tuples",
       {{"structure", Kind::Text, "dlo | rado | ordered-rado | pureset | forbidden:<file>", std::nullopt, true},
        {"group", Kind::Group, "group spec, instead of a structure", std::nullopt, true},
        {"arity", Kind::Int, "tuple length k", std::nullopt}},
       true},
      {"behaviors",
       "Enumerate coherent behavior tables",
       {{"source", Kind::Group, "source group", "aut(dlo)"},
        {"target", Kind::Group, "target group", "aut(dlo)"},
        {"arity", Kind::Int, "largest arity K", std::nullopt},
        {"out", Kind::Path, "save the tables", std::nullopt, true}}},
      {"check",
       "Check canonicity on the first n source points",
       {{"f", Kind::Oracle, "function oracle", std::nullopt},
        {"source", Kind::Group, "source group", "aut(dlo)"},
        {"target", Kind::Group, "target group", "aut(dlo)"},
        {"horizon", Kind::Int, "number of source points", "16"},
        {"arity", Kind::Int, "largest arity K", "2"},
        {"out", Kind::Path, "save the behavior table when canonical", std::nullopt, true}}},
      {"canonize",
       "Search for a canonical approximation of f",
       {{"f", Kind::Oracle, "function oracle", std::nullopt},
        {"source", Kind::Group, "source group", "aut(dlo)"},
        {"target", Kind::Group, "target group", "aut(dlo)"},
        {"arity", Kind::Int, "largest arity K", "2"},
        {"depth", Kind::Int, "tower depth", "6"},
        {"horizon", Kind::Int, "candidate pool size", "64"},
        {"budget", Kind::Int, "search node budget", "20000000"},
        {"constants", Kind::Path, "file with one constant point per line", std::nullopt, true},
        {"out", Kind::Path, "save the behavior table", std::nullopt, true}}},
      {"pham",
       "Obstruction certificate for the Q onto Q minus 0 map",
       {{"epsilon", Kind::Rational, "precision", "1/8"},
        {"budget", Kind::Int, "probe budget", "512"},
        {"out", Kind::Path, "save the certificate", std::nullopt, true},
        {"verify", Kind::Path, "recheck a saved certificate instead", std::nullopt, true}}},
      {"limit",
       "Realize a finite fragment of a limit",
       {{"structure", Kind::Text, "dlo | rado | ordered-rado | pureset | forbidden:<file>", std::nullopt, true},
        {"points", Kind::Int, "fragment size", "16"},
        {"out", Kind::Path, "save the fragment", std::nullopt, true}},
       true},
      {"verify-age",
       "Check hereditariness and amalgamation up to a bound",
       {{"age", Kind::Text, "graphs | linear-orders | ordered-graphs | pure-sets | forbidden:<file>", std::nullopt},
        {"bound", Kind::Int, "size bound", "3"}}},
      {"harness",
       "Compare the three finite-scale proxies",
       {{"f", Kind::Oracle, "function oracle", std::nullopt},
        {"source", Kind::Group, "source group", "aut(dlo)"},
        {"target", Kind::Group, "target group", "aut(dlo)"},
        {"horizon", Kind::Int, "number of source points", "8"},
        {"arity", Kind::Int, "largest arity K", "2"}}},
      {"iso",
       "Commitments of the canonical back-and-forth map",
       {{"source", Kind::Text, "q | q-minus-0", "q"},
        {"target", Kind::Text, "q | q-minus-0", "q-minus-0"},
        {"points", Kind::Int, "number of committed pairs", "10"}}},
      {"show",
       "Load a saved artifact, validate it and print it back",
       {{"kind", Kind::Text, "behavior | structure | table | certificate", std::nullopt},
        {"file", Kind::Path, "artifact file", std::nullopt},
        {"source", Kind::Group, "source group (tables)", "aut(dlo)"},
        {"target", Kind::Group, "target group (tables)", "aut(dlo)"}}},
  };
  return s;
}

std::string verb_list() {
  std::string out;
  for (const auto& s : schemas()) out += (out.empty() ? "" : " | ") + s.verb;
  return out;
}

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  auto z = s.find_last_not_of(" \t\r");
  return s.substr(a, z - a + 1);
}

std::size_t argv_position(const std::vector<std::string>& args, const std::string& token) {
  for (std::size_t i = 0; i < args.size(); ++i)
    if (args[i] == token) return i;
  for (std::size_t i = 0; i < args.size(); ++i)
    if (!token.empty() && args[i].find(token) != std::string::npos) return i;
  return args.size();
}

long long parse_positive(const std::string& text) {
  long long v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size() || v < 1) throw std::invalid_argument("positive integer");
  return v;
}

void validate(const Flag& flag, const std::string& value, std::size_t position) {
  auto wrap = [&](const UsageError& e, const std::string& what) {
    throw UsageError(position, value, what + " (" + e.what() + ")");
  };
  switch (flag.kind) {
    case Kind::Int:
      try {
        parse_positive(value);
      } catch (const std::exception&) {
        throw UsageError(position, value, "positive integer for --" + flag.name);
      }
      break;
    case Kind::Rational:
      try {
        Rational::parse(value);
      } catch (const std::exception&) {
        throw UsageError(position, value, "rational literal p/q for --" + flag.name);
      }
      break;
    case Kind::Group:
      try {
        parse_group(value);
      } catch (const UsageError& e) {
        wrap(e, "group spec for --" + flag.name);
      } catch (const std::exception& e) {
        throw UsageError(position, value, "group spec for --" + flag.name + " (" + e.what() + ")");
      }
      break;
    case Kind::Oracle:
      try {
        parse_oracle_expr(value);
      } catch (const UsageError& e) {
        wrap(e, "oracle string for --" + flag.name);
      }
      break;
    case Kind::Path:
    case Kind::Text:
      if (value.empty()) throw UsageError(position, value, "nonempty value for --" + flag.name);
      break;
  }
}

// ------------------------------------------------------------------ oracles

class OracleReader {
public:
  explicit OracleReader(const std::string& text) : text_(text) {}

  OracleExpr expr() {
    std::size_t start = pos_;
    if (accept("compose(")) {
      OracleExpr e{"compose", {}, {}};
      e.children.push_back(expr());
      expect(",");
      e.children.push_back(expr());
      expect(")");
      return e;
    }
    if (accept("pieces:")) {
      if (peek() != '[') fail(pos_, "'[' opening the piece list");
      std::size_t open = pos_;
      for (++pos_; pos_ < text_.size(); ++pos_)
        if (text_[pos_] == ']' && closes_list(open, pos_)) break;
      if (pos_ >= text_.size()) fail(open, "']' closing the piece list");
      ++pos_;
      std::string body = text_.substr(open, pos_ - open);
      try {
        parse_pieces(body);
      } catch (const UsageError& e) {
        fail(open + e.position(), std::string("affine pieces: ") + e.what());
      } catch (const std::exception& e) {
        fail(open, std::string("affine pieces: ") + e.what());
      }
      return {"pieces", body, {}};
    }
    if (accept("const:")) {
      std::string lit = word();
      try {
        Rational::parse(lit);
      } catch (const std::exception&) {
        fail(start + 6, "rational literal after const:");
      }
      return {"const", lit, {}};
    }
    if (accept("proj:")) {
      std::string lit = word();
      try {
        parse_positive(lit);
      } catch (const std::exception&) {
        fail(start + 5, "positive coordinate after proj:");
      }
      return {"proj", lit, {}};
    }
    if (accept("min:")) {
      std::string lit = word();
      try {
        parse_positive(lit);
      } catch (const std::exception&) {
        fail(start + 4, "positive arity after min:");
      }
      return {"min", lit, {}};
    }
    if (accept("table:")) {
      std::string path = word();
      if (path.empty()) fail(start + 6, "file path after table:");
      return {"table", path, {}};
    }
    std::string w = word();
    if (w == "id" || w == "neg" || w == "pham" || w == "min") return {w, {}, {}};
    fail(start, "id | neg | pham | min | min:m | proj:i | const:p/q | pieces:[...] | compose(a,b) | table:<file>");
  }

  void finish() {
    if (pos_ != text_.size()) fail(pos_, "end of oracle string");
  }

private:
  // Interval brackets come before the piece's ':', the list's ']' after it.
  bool closes_list(std::size_t open, std::size_t at) const {
    std::size_t seg = text_.rfind(';', at);
    std::size_t from = seg == std::string::npos || seg < open ? open + 1 : seg + 1;
    std::string piece = text_.substr(from, at - from);
    return piece.find(':') != std::string::npos;
  }

  [[noreturn]] void fail(std::size_t at, const std::string& expected) const {
    std::string tok = at < text_.size() ? text_.substr(at, 12) : std::string("<end>");
    throw UsageError(at, tok, expected);
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  bool accept(const std::string& s) {
    if (text_.compare(pos_, s.size(), s) != 0) return false;
    pos_ += s.size();
    return true;
  }

  void expect(const std::string& s) {
    if (!accept(s)) fail(pos_, "'" + s + "'");
  }

  // Up to the next top-level ',' or ')'.
  std::string word() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ')') ++pos_;
    return text_.substr(start, pos_ - start);
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

std::string oracle_name(const OracleExpr& e) {
  if (e.kind == "compose") return "compose(" + oracle_name(e.children[0]) + "," + oracle_name(e.children[1]) + ")";
  if (e.kind == "pieces") return "pieces:" + e.argument;
  if (e.argument.empty()) return e.kind;
  return e.kind + ":" + e.argument;
}

// ---------------------------------------------------------------- reporting

std::string harness_str(const HarnessReport& r) {
  std::ostringstream out;
  out << "proxy1: " << (std::holds_alternative<CanonicalUpTo>(r.proxy1) ? "canonical-up-to" : "counterexample")
      << "\n";
  out << "proxy2: " << (r.proxy2 ? "pass" : "fail") << "\n";
  out << "proxy3: " << (r.proxy3 ? "pass" : "fail") << "\n";
  out << "samples: " << r.samples.size() << "\n";
  out << "agree: " << (r.agree ? "yes" : "no") << "\n";
  out << "witnesses_match: " << (r.witnesses_match ? "yes" : "no") << "\n";
  if (r.first_failure) {
    const auto& s = r.samples[*r.first_failure];
    out << "first_failure: " << *r.first_failure << "\n";
    std::string a, b;
    for (const auto& p : s.s) a += (a.empty() ? "" : " ") + p.str();
    for (const auto& p : s.t) b += (b.empty() ? "" : " ") + p.str();
    out << "failure_s: " << a << "\n";
    out << "failure_t: " << b << "\n";
  }
  if (!r.discrepancy.empty()) out << "discrepancy: " << r.discrepancy << "\n";
  return out.str();
}

std::string age_report_str(const AgeOracle& age, int bound, const AmalgamationReport& r) {
  std::ostringstream out;
  out << "age: " << age.name() << "\n";
  out << "bound: " << bound << "\n";
  out << "result: " << (r.ok ? "ok" : "violation") << "\n";
  if (!r.ok) {
    out << "violation: " << r.violation << "\n";
    out << "detail: " << r.detail << "\n";
  }
  out << "hereditary_checked_up_to: " << r.hereditary_checked_up_to << "\n";
  return out.str();
}

std::string claims_str(const CertificateCheck& c) {
  std::ostringstream out;
  for (const auto& [name, holds] : c.claims) out << "claim: " << (holds ? "holds" : "FAILS") << ": " << name << "\n";
  return out.str();
}

// ----------------------------------------------------------------- commands

struct Context {
  const CommandSpec& spec;

  const std::string& get(const std::string& key) const { return spec.options.at(key); }
  std::size_t num(const std::string& key) const { return static_cast<std::size_t>(parse_positive(get(key))); }
  int arity(const std::string& key) const { return static_cast<int>(num(key)); }
  GroupPresentation group(const std::string& key) const { return parse_group(get(key)); }

  std::string structure() const {
    if (!spec.arguments.empty() && spec.has("structure"))
      throw UsageError(1, spec.arguments[0], "either a positional structure or --structure, not both");
    if (!spec.arguments.empty()) return spec.arguments[0];
    if (spec.has("structure")) return get("structure");
    throw UsageError(1, "<none>", "a structure (positional or --structure)");
  }

  FunctionOracle oracle(const GroupPresentation& g, const GroupPresentation& h) const {
    return build_oracle(parse_oracle_expr(get("f")), g, h);
  }
};

RunOutput cmd_orbits(const Context& c) {
  std::ostringstream out;
  int k = c.arity("arity");
  if (c.spec.has("group")) {
    if (!c.spec.arguments.empty() || c.spec.has("structure"))
      throw UsageError(1, c.get("group"), "either --group or a structure, not both");
    auto g = c.group("group");
    out << "group: " << g.str() << "\n";
    out << "arity: " << k << "\n";
    out << "orbits: " << g.count_orbits(k) << "\n";
  } else {
    auto limit = parse_structure_spec(c.structure());
    out << "structure: " << limit->name() << "\n";
    out << "arity: " << k << "\n";
    out << "orbits: " << count_orbits(*limit, k) << "\n";
  }
  return {0, out.str()};
}

RunOutput cmd_behaviors(const Context& c) {
  auto tables = enumerate_behaviors(c.group("source"), c.group("target"), c.arity("arity"));
  std::ostringstream out;
  out << "tables: " << tables.size() << "\n";
  out << behaviors_str(tables);
  if (c.spec.has("out")) write_file(c.get("out"), behaviors_str(tables));
  return {0, out.str()};
}

RunOutput cmd_check(const Context& c) {
  auto g = c.group("source"), h = c.group("target");
  auto f = c.oracle(g, h);
  auto v = check_canonical(f, g, h, c.num("horizon"), c.arity("arity"));
  std::string report = verdict_str(v, g, h);
  if (const auto* ce = std::get_if<Counterexample>(&v)) {
    report += std::string("reverified: ") + (verify_counterexample(f, g, h, *ce) ? "yes" : "no") + "\n";
  } else if (c.spec.has("out")) {
    write_file(c.get("out"), behavior_str(std::get<CanonicalUpTo>(v).behavior));
  }
  return {0, report};
}

RunOutput cmd_canonize(const Context& c) {
  auto g = c.group("source"), h = c.group("target");
  auto f = c.oracle(g, h);
  int k = c.arity("arity");
  CanonizeResult r = HorizonExhausted{};
  if (c.spec.has("constants")) {
    auto dlo = GroupPresentation::aut(builtin_limit("dlo"));
    int m = g.kind() == GroupPresentation::Kind::Power ? g.power_arity() : 1;
    auto plain = m == 1 ? dlo : GroupPresentation::power(dlo, m);
    if (!(g == plain) || !(h == dlo))
      throw UsageError(0, "--constants", "source aut(dlo) or power(aut(dlo),m) and target aut(dlo) with constants");
    std::vector<Point> constants;
    std::istringstream in(read_file(c.get("constants")));
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
      ++number;
      line = trim(line.substr(0, line.find('#')));
      if (line.empty()) continue;
      try {
        constants.push_back(parse_point(g, line));
      } catch (const std::exception& e) {
        throw FormatError(number, std::string("bad constant: ") + e.what());
      }
    }
    r = canonize_with_constants(f, m, constants, k, c.num("depth"), c.num("horizon"));
  } else {
    CanonizeOptions options;
    options.node_budget = c.num("budget");
    r = canonize(f, g, h, k, c.num("depth"), c.num("horizon"), options);
  }
  std::string report = canonize_str(r);
  if (const auto* a = std::get_if<CanonicalApproximation>(&r)) {
    if (c.spec.has("out")) write_file(c.get("out"), behavior_str(a->behavior));
    return {0, report};
  }
  return {2, report};
}

RunOutput cmd_pham(const Context& c) {
  if (c.spec.has("verify")) {
    auto cert = parse_certificate(read_file(c.get("verify")));
    auto check = check_certificate(cert);
    std::string report = certificate_str(cert) + claims_str(check);
    report += std::string("result: ") + (check.ok() ? "certificate-verified" : "certificate-rejected") + "\n";
    return {check.ok() ? 0 : 1, report};
  }
  auto eps = Rational::parse(c.get("epsilon"));
  ObstructionCertificate cert;
  try {
    cert = pham_refute(eps, c.num("budget"));
  } catch (const BudgetExhausted& e) {
    return {2, std::string("result: inconclusive\nreason: ") + e.what() + "\n"};
  }
  auto check = check_certificate(cert);
  if (c.spec.has("out")) write_file(c.get("out"), certificate_str(cert));
  std::string report = certificate_str(cert) + claims_str(check);
  report += std::string("result: ") + (check.ok() ? "certificate-verified" : "certificate-rejected") + "\n";
  return {check.ok() ? 0 : 1, report};
}

RunOutput cmd_limit(const Context& c) {
  auto limit = parse_structure_spec(c.structure());
  std::size_t n = c.num("points");
  std::ostringstream out;
  out << "structure: " << limit->name() << "\n";
  out << "points: " << n << "\n";
  if (limit->is_dlo()) {
    out << "elements:";
    for (std::size_t i = 0; i < n; ++i) out << " " << limit->element(i).str();
    out << "\n";
    return {0, out.str()};
  }
  const auto* generic = dynamic_cast<const GenericLimit*>(limit.get());
  if (!generic) throw std::logic_error("limit verb needs a generic or dlo limit");
  generic->grow_to(n);
  FiniteStructure full = generic->fragment();
  std::vector<int> first(n);
  for (std::size_t i = 0; i < n; ++i) first[i] = static_cast<int>(i);
  FiniteStructure fragment = full.induced(first);
  out << "fragment:\n" << structure_str(fragment);
  out << "demands:\n";
  for (const auto& d : generic->demand_log()) {
    if (d.witness >= n) continue;
    out << "  m=" << d.fragment_size << " e=" << d.extension << " witness=" << d.witness
        << (d.fresh ? " fresh" : "") << "\n";
  }
  if (c.spec.has("out")) write_file(c.get("out"), structure_str(fragment));
  return {0, out.str()};
}

RunOutput cmd_verify_age(const Context& c) {
  auto age = parse_age_spec(c.get("age"));
  int bound = c.arity("bound");
  return {0, age_report_str(age, bound, verify_amalgamation(age, bound))};
}

RunOutput cmd_harness(const Context& c) {
  auto g = c.group("source"), h = c.group("target");
  auto f = c.oracle(g, h);
  return {0, harness_str(proposition_harness(f, g, h, c.num("horizon"), c.arity("arity")))};
}

RunOutput cmd_iso(const Context& c) {
  auto src = ComputableDenseSet::by_name(c.get("source"));
  auto tgt = ComputableDenseSet::by_name(c.get("target"));
  auto m = canonical_iso(src, tgt);
  m->run_stages(c.num("points"));
  std::ostringstream out;
  out << "source: " << src.name << "\n";
  out << "target: " << tgt.name << "\n";
  out << "pairs:\n";
  for (const auto& [x, y] : m->commitments()) out << "  " << x << " -> " << y << "\n";
  return {0, out.str()};
}

RunOutput cmd_show(const Context& c) {
  const std::string& kind = c.get("kind");
  std::string text = read_file(c.get("file"));
  if (kind == "behavior") {
    auto tables = parse_behaviors(text);
    for (const auto& t : tables)
      if (auto v = coherence_check(t)) throw FormatError(0, "incoherent table: " + v->detail);
    return {0, behaviors_str(tables)};
  }
  if (kind == "structure") return {0, structure_str(parse_structure(text))};
  if (kind == "certificate") return {0, certificate_str(parse_certificate(text))};
  if (kind == "table") {
    auto g = c.group("source"), h = c.group("target");
    parse_function_table(text, g, h);
    // Reprint in canonical form from the validated lines.
    std::vector<std::pair<Point, Point>> pairs;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      line = trim(line.substr(0, line.find('#')));
      if (line.empty()) continue;
      auto arrow = line.find("->");
      pairs.emplace_back(parse_point(g, trim(line.substr(0, arrow))), parse_point(h, trim(line.substr(arrow + 2))));
    }
    return {0, function_table_str(pairs)};
  }
  throw UsageError(1, kind, "behavior | structure | table | certificate");
}

}  // namespace

// ------------------------------------------------------------------- public

CommandSpec parse_command(const std::vector<std::string>& args) {
  if (args.empty()) throw UsageError(0, "<none>", "a verb: " + verb_list());
  auto schema = std::find_if(schemas().begin(), schemas().end(), [&](const auto& s) { return s.verb == args[0]; });
  if (schema == schemas().end()) throw UsageError(0, args[0], "a verb: " + verb_list());

  CommandSpec spec;
  spec.verb = args[0];
  CLI::App app(schema->help, "canonfn " + schema->verb);
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  for (const auto& flag : schema->flags) {
    auto* o = app.add_option("--" + flag.name, values[flag.name], flag.help);
    if (flag.fallback) o->default_str(*flag.fallback);
    options[flag.name] = o;
  }
  if (schema->positional) app.add_option("structure_arg", spec.arguments, "structure")->expected(0, 1);

  std::vector<std::string> rest(args.rbegin(), args.rend() - 1);
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    spec.help = app.help();
    return spec;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::string token = "<none>";
    for (std::size_t i = 1; i < args.size(); ++i)
      if (msg.find(args[i]) != std::string::npos) {
        token = args[i];
        break;
      }
    throw UsageError(token == "<none>" ? args.size() : argv_position(args, token), token, msg);
  }

  for (const auto& flag : schema->flags) {
    if (options[flag.name]->count() > 0) {
      const std::string& value = values[flag.name];
      validate(flag, value, argv_position(args, value));
      spec.options[flag.name] = value;
    } else if (flag.fallback) {
      spec.options[flag.name] = *flag.fallback;
    } else if (!flag.optional) {
      throw UsageError(args.size(), "<end>", "--" + flag.name + " (" + flag.help + ")");
    }
  }
  return spec;
}

RunOutput run(const CommandSpec& spec) {
  if (spec.help) return {0, *spec.help};
  Context c{spec};
  try {
    if (spec.verb == "orbits") return cmd_orbits(c);
    if (spec.verb == "behaviors") return cmd_behaviors(c);
    if (spec.verb == "check") return cmd_check(c);
    if (spec.verb == "canonize") return cmd_canonize(c);
    if (spec.verb == "pham") return cmd_pham(c);
    if (spec.verb == "limit") return cmd_limit(c);
    if (spec.verb == "verify-age") return cmd_verify_age(c);
    if (spec.verb == "harness") return cmd_harness(c);
    if (spec.verb == "iso") return cmd_iso(c);
    if (spec.verb == "show") return cmd_show(c);
    throw UsageError(0, spec.verb, "a verb: " + verb_list());
  } catch (const FormatError& e) {
    return {1, std::string("error: FormatError: ") + e.what() + "\n"};
  } catch (const UsageError& e) {
    return {1, std::string("error: UsageError: ") + e.what() + "\n"};
  } catch (const ArityLimitExceeded& e) {
    return {1, std::string("error: ArityLimitExceeded: ") + e.what() + "\n"};
  } catch (const AmalgamationFailure& e) {
    return {1, std::string("error: AmalgamationFailure: ") + e.what() + "\n"};
  } catch (const DensityProbeFailure& e) {
    return {1, std::string("error: DensityProbeFailure: ") + e.what() + "\n"};
  } catch (const DomainGap& e) {
    return {1, std::string("error: DomainGap: ") + e.what() + "\n"};
  } catch (const BudgetExhausted& e) {
    return {2, std::string("result: inconclusive\nreason: ") + e.what() + "\n"};
  } catch (const std::exception& e) {
    return {1, std::string("error: ") + e.what() + "\n"};
  }
}

RunRecord make_record(const std::vector<std::string>& args, const std::string& report,
                      std::chrono::steady_clock::duration wall) {
  RunRecord r;
  for (const auto& a : args) r.command += (r.command.empty() ? "" : " ") + a;
  r.version = kVersion;
  r.wall_seconds = std::chrono::duration<double>(wall).count();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : report) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  std::ostringstream d;
  d << std::hex << std::setw(16) << std::setfill('0') << h;
  r.digest = d.str();
  return r;
}

std::string record_str(const RunRecord& r) {
  std::ostringstream out;
  out << "record: command=\"" << r.command << "\" version=\"" << r.version << "\" seedless=deterministic"
      << " wall_s=" << std::fixed << std::setprecision(3) << r.wall_seconds << " digest=" << r.digest << "\n";
  return out.str();
}

OracleExpr parse_oracle_expr(const std::string& text) {
  OracleReader r(text);
  OracleExpr e = r.expr();
  r.finish();
  return e;
}

FunctionOracle build_oracle(const OracleExpr& e, const GroupPresentation& source, const GroupPresentation& target) {
  if (e.kind == "id") return FunctionOracle::identity();
  if (e.kind == "neg") return FunctionOracle::negation();
  if (e.kind == "const") return FunctionOracle::constant(Rational::parse(e.argument));
  if (e.kind == "pieces") return FunctionOracle::pieces(parse_pieces(e.argument));
  if (e.kind == "pham")
    return map_oracle(canonical_iso(ComputableDenseSet::rationals(), ComputableDenseSet::rationals_without_zero()),
                      "pham");
  if (e.kind == "min") {
    int m = e.argument.empty() ? source.point_arity() : static_cast<int>(parse_positive(e.argument));
    return FunctionOracle::minimum(m);
  }
  if (e.kind == "proj") return FunctionOracle::projection(static_cast<int>(parse_positive(e.argument)) - 1,
                                                          source.point_arity());
  if (e.kind == "table") return parse_function_table(read_file(e.argument), source, target);
  if (e.kind == "compose") {
    // The intermediate domain is taken to be the target.
    auto inner = build_oracle(e.children[1], source, target);
    auto outer = build_oracle(e.children[0], target, target);
    auto f = FunctionOracle::compose(outer, inner);
    return FunctionOracle(oracle_name(e), [f](const Point& x) { return f.try_eval(x); });
  }
  throw std::invalid_argument("unknown oracle kind '" + e.kind + "'");
}

AgeOracle parse_age_spec(const std::string& text) {
  if (text == "graphs") return AgeOracle::graphs();
  if (text == "linear-orders") return AgeOracle::linear_orders();
  if (text == "ordered-graphs") return AgeOracle::ordered_graphs();
  if (text == "pure-sets") return AgeOracle::pure_sets();
  if (text.rfind("forbidden:", 0) == 0) {
    std::string path = text.substr(10);
    return parse_forbidden_age(read_file(path), "forbidden:" + path);
  }
  throw UsageError(0, text, "graphs | linear-orders | ordered-graphs | pure-sets | forbidden:<file>");
}

AgeOracle parse_forbidden_age(const std::string& text, const std::string& name) {
  std::optional<AgeOracle> base;
  std::vector<FiniteStructure> forbidden;
  std::istringstream in(text);
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.rfind("base ", 0) == 0) {
      if (base || !forbidden.empty()) throw FormatError(number, "'base' must come first and only once");
      std::string b = trim(line.substr(5));
      if (b == "graphs") base = AgeOracle::graphs();
      else if (b == "linear-orders") base = AgeOracle::linear_orders();
      else if (b == "ordered-graphs") base = AgeOracle::ordered_graphs();
      else if (b == "pure-sets") base = AgeOracle::pure_sets();
      else throw FormatError(number, "unknown base age '" + b + "'");
      continue;
    }
    if (!base) base = AgeOracle::graphs();
    const Signature& sig = base->signature();
    std::vector<std::string> parts;
    std::stringstream ss(line);
    std::string part;
    while (std::getline(ss, part, ';')) {
      part = trim(part);
      if (!part.empty()) parts.push_back(part);
    }
    if (parts.empty() || parts[0].rfind("size ", 0) != 0) throw FormatError(number, "expected 'size k; ...'");
    int size = 0;
    try {
      size = static_cast<int>(parse_positive(trim(parts[0].substr(5))));
    } catch (const std::exception&) {
      throw FormatError(number, "size must be a positive integer");
    }
    FiniteStructure s(sig, size);
    std::optional<std::size_t> edge = sig.index_of("E");
    for (std::size_t i = 1; i < parts.size(); ++i) {
      const std::string& atom = parts[i];
      auto open = atom.find('('), close = atom.rfind(')');
      if (open == std::string::npos || close != atom.size() - 1) throw FormatError(number, "bad atom '" + atom + "'");
      auto sym = sig.index_of(trim(atom.substr(0, open)));
      if (!sym) throw FormatError(number, "unknown relation in '" + atom + "'");
      IndexTuple t;
      std::stringstream args(atom.substr(open + 1, close - open - 1));
      std::string a;
      while (std::getline(args, a, ',')) {
        try {
          long long v = std::stoll(trim(a));
          if (v < 0 || v >= size) throw std::out_of_range("index");
          t.push_back(static_cast<int>(v));
        } catch (const std::exception&) {
          throw FormatError(number, "bad index in '" + atom + "'");
        }
      }
      if (static_cast<int>(t.size()) != sig[*sym].arity) throw FormatError(number, "wrong arity in '" + atom + "'");
      s.set(*sym, t);
      if (edge && *sym == *edge && t.size() == 2) s.set(*sym, {t[1], t[0]});
    }
    if (!base->contains(s)) throw FormatError(number, "forbidden structure is not in the base age");
    forbidden.push_back(std::move(s));
  }
  if (!base) base = AgeOracle::graphs();
  return AgeOracle::forbidding(*base, std::move(forbidden), name);
}

std::shared_ptr<const LimitStructure> parse_structure_spec(const std::string& text) {
  std::string t = text.rfind("builtin:", 0) == 0 ? text.substr(8) : text;
  if (t == "dlo" || t == "rado" || t == "ordered-rado" || t == "pureset") return builtin_limit(t);
  if (t.rfind("forbidden:", 0) == 0) return std::make_shared<GenericLimit>(parse_age_spec(t), t);
  throw UsageError(0, text, "dlo | rado | ordered-rado | pureset | builtin:<name> | forbidden:<file>");
}

std::string structure_str(const FiniteStructure& s) {
  std::ostringstream out;
  out << "signature:";
  for (std::size_t i = 0; i < s.signature().size(); ++i)
    out << (i ? "," : " ") << s.signature()[i].name << "/" << s.signature()[i].arity;
  out << "\n";
  out << "size: " << s.size() << "\n";
  for (std::size_t sym = 0; sym < s.signature().size(); ++sym)
    for (const auto& t : s.table(sym)) {
      out << s.signature()[sym].name << "(";
      for (std::size_t i = 0; i < t.size(); ++i) out << (i ? "," : "") << t[i];
      out << ")\n";
    }
  return out.str();
}

FiniteStructure parse_structure(const std::string& text) {
  std::optional<Signature> sig;
  std::optional<FiniteStructure> s;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.rfind("signature:", 0) == 0) {
      if (sig) throw FormatError(number, "duplicate signature");
      std::vector<RelationSymbol> symbols;
      std::stringstream ss(line.substr(10));
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        auto slash = item.rfind('/');
        if (slash == std::string::npos) throw FormatError(number, "expected name/arity, got '" + item + "'");
        try {
          symbols.push_back({item.substr(0, slash), static_cast<int>(parse_positive(item.substr(slash + 1)))});
        } catch (const std::exception&) {
          throw FormatError(number, "bad arity in '" + item + "'");
        }
      }
      try {
        sig = Signature(symbols);
      } catch (const std::exception& e) {
        throw FormatError(number, e.what());
      }
      continue;
    }
    if (line.rfind("size:", 0) == 0) {
      if (!sig) throw FormatError(number, "size before signature");
      if (s) throw FormatError(number, "duplicate size");
      std::string v = trim(line.substr(5));
      int n = 0;
      auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
      if (ec != std::errc() || p != v.data() + v.size() || n < 0) throw FormatError(number, "bad size '" + v + "'");
      s = FiniteStructure(*sig, n);
      continue;
    }
    if (!s) throw FormatError(number, "tuple before signature and size");
    auto open = line.find('(');
    if (open == std::string::npos || line.back() != ')') throw FormatError(number, "bad tuple '" + line + "'");
    auto sym = sig->index_of(trim(line.substr(0, open)));
    if (!sym) throw FormatError(number, "unknown relation in '" + line + "'");
    IndexTuple t;
    std::stringstream args(line.substr(open + 1, line.size() - open - 2));
    std::string a;
    while (std::getline(args, a, ',')) {
      a = trim(a);
      int v = -1;
      auto [p, ec] = std::from_chars(a.data(), a.data() + a.size(), v);
      if (ec != std::errc() || p != a.data() + a.size() || v < 0 || v >= s->size())
        throw FormatError(number, "bad index '" + a + "'");
      t.push_back(v);
    }
    if (static_cast<int>(t.size()) != (*sig)[*sym].arity) throw FormatError(number, "wrong arity in '" + line + "'");
    if (s->holds(*sym, t)) throw FormatError(number, "duplicate tuple '" + line + "'");
    s->set(*sym, t);
  }
  if (!s) throw FormatError(number, "missing signature or size");
  return *s;
}

std::string behaviors_str(const std::vector<BehaviorTable>& tables) {
  std::string out;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    if (i) out += "---\n";
    out += behavior_str(tables[i]);
  }
  return out;
}

std::vector<BehaviorTable> parse_behaviors(const std::string& text) {
  std::vector<BehaviorTable> out;
  std::istringstream in(text);
  std::string raw, block;
  std::size_t number = 0, block_start = 1;
  auto flush = [&]() {
    if (trim(block).empty()) {
      block.clear();
      return;
    }
    try {
      out.push_back(parse_behavior(block));
    } catch (const FormatError& e) {
      std::string msg = e.what();
      auto colon = msg.find(": ");
      throw FormatError(e.line() + block_start - 1, colon == std::string::npos ? msg : msg.substr(colon + 2));
    }
    block.clear();
  };
  while (std::getline(in, raw)) {
    ++number;
    if (trim(raw) == "---") {
      flush();
      block_start = number + 1;
      continue;
    }
    block += raw + "\n";
  }
  flush();
  if (out.empty()) throw FormatError(number, "no behavior table");
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace canonfn
