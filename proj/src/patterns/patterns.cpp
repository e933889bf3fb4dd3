#include "robgen/patterns/patterns.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <unordered_map>
#include <utility>

#include "robgen/error.hpp"
#include "robgen/io.hpp"
#include "robgen/java/parser.hpp"
#include "robgen/metrics/atoms.hpp"

namespace robgen::patterns {

using java::Node;
using java::NodeKind;
using java::SyntaxTree;
using java::TokenKind;
using nlohmann::json;

namespace {

constexpr std::string_view kKindNames[] = {
    "null_check", "specific_value_check", "range_check", "boolean_value_check",
    "type_check", "assertion",            "error_handling",
};
constexpr std::string_view kConstructNames[] = {"if", "while", "for", "ternary", "assert", "try"};
constexpr std::string_view kPatternNames[] = {
    "missing_null_check",         "missing_specific_value_check", "missing_range_check",
    "missing_boolean_value_check", "missing_type_check",           "missing_assertion",
    "missing_error_handling",     "erroneous_expression",         "inconsistent_expression",
};

template <typename E, std::size_t N>
E lookup(const std::string_view (&names)[N], std::string_view s, const char* what) {
  for (std::size_t i = 0; i < N; ++i)
    if (names[i] == s) return static_cast<E>(i);
  throw Error(ErrorKind::Format, std::string("unknown ") + what + " '" + std::string(s) + "'");
}

// '>' is always lexed alone, so ">=" and ">>=" arrive as glued pieces.
std::string op_text(const SyntaxTree& t, std::uint32_t op) {
  std::string s(t.text(op));
  for (std::uint32_t i = op + 1;
       i < t.roles().size() && t.roles()[i] == java::TokenRole::SpacedCont; ++i)
    s += t.text(i);
  return s;
}

bool is_op(const SyntaxTree& t, const Node& n, std::initializer_list<std::string_view> ops) {
  if (n.kind != NodeKind::Binary || n.op == java::kNoToken || n.children.size() != 2) return false;
  auto op = op_text(t, n.op);
  return std::find(ops.begin(), ops.end(), op) != ops.end();
}

bool is_null(const SyntaxTree& t, const Node& n) {
  return n.kind == NodeKind::Literal && t.tokens()[n.first].kind == TokenKind::Null;
}

bool is_constant(const SyntaxTree& t, const Node& n) {
  if (n.kind == NodeKind::Literal) return !is_null(t, n);
  if (n.kind == NodeKind::Unary && n.children.size() == 1 && n.op != java::kNoToken) {
    auto op = t.text(n.op);
    return (op == "-" || op == "+") && n.children[0].kind == NodeKind::Literal &&
           t.tokens()[n.children[0].first].kind == TokenKind::Number;
  }
  return false;
}

std::size_t call_args(const Node& n) {
  return n.children.size() - (n.has(Node::kHasReceiver) && !n.children.empty() ? 1 : 0);
}

GuardKind classify(const SyntaxTree& t, const Node& n) {
  if (is_op(t, n, {"==", "!="}) && (is_null(t, n.children[0]) || is_null(t, n.children[1])))
    return GuardKind::NullCheck;
  if (n.kind == NodeKind::InstanceOf) return GuardKind::TypeCheck;
  if (is_op(t, n, {"==", "!="}) &&
      (is_constant(t, n.children[0]) || is_constant(t, n.children[1])))
    return GuardKind::SpecificValueCheck;
  if (n.kind == NodeKind::Call && n.name != java::kNoToken && t.text(n.name) == "isEmpty" &&
      call_args(n) == 0)
    return GuardKind::SpecificValueCheck;
  if (is_op(t, n, {"<", "<=", ">", ">="})) return GuardKind::RangeCheck;
  if (is_op(t, n, {"==", "!="})) return GuardKind::SpecificValueCheck;
  return GuardKind::BooleanValueCheck;
}

const Node* peel_parens(const Node* n) {
  while (n->kind == NodeKind::Paren && !n->children.empty()) n = &n->children.front();
  return n;
}

std::uint32_t relative(std::uint32_t line, std::uint32_t body) {
  return line > body ? line - body : 1;
}

// Statements in pre-order, skipping blocks and empty statements.
std::vector<const Node*> statements(const SyntaxTree& t) {
  std::vector<const Node*> out;
  java::walk(t.root(), [&](const Node& n) {
    if (java::is_statement(n.kind) && n.kind != NodeKind::Block && n.kind != NodeKind::Empty)
      out.push_back(&n);
    return true;
  });
  return out;
}

// Token range that identifies a statement: the header for compound ones.
std::pair<std::uint32_t, std::uint32_t> key_range(const Node& n) {
  std::uint32_t end = n.last;
  switch (n.kind) {
    case NodeKind::If:
    case NodeKind::While:
      if (n.children.size() >= 2) end = n.children[1].first;
      break;
    case NodeKind::For:
    case NodeKind::ForEach:
    case NodeKind::Synchronized:
    case NodeKind::Labeled:
      if (!n.children.empty()) end = n.children.back().first;
      break;
    case NodeKind::Try:
      for (const auto& c : n.children) {
        if (c.kind == NodeKind::Block) {
          end = c.first;
          break;
        }
      }
      break;
    case NodeKind::Switch:
      if (!n.children.empty()) end = n.children[0].last + 1;
      break;
    case NodeKind::DoWhile:
      end = n.first + 1;
      break;
    default:
      break;
  }
  if (end <= n.first) end = n.first + 1;
  if (end > n.last) end = n.last;
  return {n.first, end};
}

std::string statement_key(const SyntaxTree& t, const Node& n) {
  auto [a, b] = key_range(n);
  return std::string(to_string(n.kind)) + "|" + t.render(a, b);
}

std::uint32_t statement_anchor_line(const SyntaxTree& t, const Node& n) {
  auto [a, b] = key_range(n);
  return t.tokens()[b > a ? b - 1 : a].end_line;
}

bool capitalized(std::string_view s) {
  return !s.empty() && std::isupper(static_cast<unsigned char>(s.front()));
}

std::set<std::string> declared_names(const SyntaxTree& t) {
  std::set<std::string> out;
  java::walk(t.root(), [&](const Node& n) {
    if ((n.kind == NodeKind::Parameter || n.kind == NodeKind::VarDeclarator ||
         n.kind == NodeKind::InstanceOf) &&
        n.name != java::kNoToken)
      out.emplace(t.text(n.name));
    return true;
  });
  return out;
}

std::set<std::string> identifiers(const SyntaxTree& t) {
  std::set<std::string> out;
  for (std::uint32_t i = 0; i < t.tokens().size(); ++i)
    if (t.tokens()[i].kind == TokenKind::Identifier) out.emplace(t.text(i));
  return out;
}

// Variable and receiverless method names an expression depends on.
std::vector<std::string> free_names(std::string_view expression) {
  std::vector<std::string> out;
  SyntaxTree t = java::parse_expression(std::string(expression));
  if (t.root().children.empty()) return out;
  std::set<std::string> bound;
  java::walk(t.root(), [&](const Node& n) {
    if (n.kind == NodeKind::Parameter && n.name != java::kNoToken) bound.emplace(t.text(n.name));
    if (n.kind == NodeKind::InstanceOf && n.name != java::kNoToken)
      bound.emplace(t.text(n.name));
    return true;
  });
  java::walk(t.root(), [&](const Node& n) {
    if (n.kind == NodeKind::Type || n.kind == NodeKind::ClassLiteral) return false;
    bool want = n.kind == NodeKind::Name ||
                (n.kind == NodeKind::Call && !n.has(Node::kHasReceiver));
    if (want && n.name != java::kNoToken && t.tokens()[n.name].kind == TokenKind::Identifier) {
      std::string s(t.text(n.name));
      if (!bound.count(s)) out.push_back(std::move(s));
    }
    return true;
  });
  return out;
}

std::vector<std::size_t> line_order(const std::vector<Guard>& gs) {
  std::vector<std::size_t> idx(gs.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return gs[a].line < gs[b].line; });
  return idx;
}

void finalize(IssueReport& r) {
  std::stable_sort(r.findings.begin(), r.findings.end(), [](const Finding& a, const Finding& b) {
    if (a.line != b.line) return a.line < b.line;
    return a.pattern < b.pattern;
  });
  if (r.findings.empty()) {
    r.first_occurrence_line.reset();
  } else {
    r.first_occurrence_line = r.findings.front().line;
  }
}

}  // namespace

std::string_view to_string(GuardKind k) noexcept { return kKindNames[static_cast<int>(k)]; }
std::string_view to_string(GuardConstruct c) noexcept {
  return kConstructNames[static_cast<int>(c)];
}
std::string_view to_string(Pattern p) noexcept { return kPatternNames[static_cast<int>(p)]; }

GuardKind guard_kind_from_string(std::string_view s) {
  return lookup<GuardKind>(kKindNames, s, "guard kind");
}
GuardConstruct guard_construct_from_string(std::string_view s) {
  return lookup<GuardConstruct>(kConstructNames, s, "construct");
}
Pattern pattern_from_string(std::string_view s) {
  return lookup<Pattern>(kPatternNames, s, "pattern");
}

Pattern missing_pattern(GuardKind k) noexcept { return static_cast<Pattern>(static_cast<int>(k)); }

bool is_missing(Pattern p) noexcept { return p <= Pattern::MissingErrorHandling; }

void to_json(json& j, const Guard& g) {
  j = json{{"kind", to_string(g.kind)},
           {"expression", g.expression},
           {"line", g.line},
           {"enclosing_construct", to_string(g.enclosing_construct)}};
}

void from_json(const json& j, Guard& g) {
  g.kind = guard_kind_from_string(j.at("kind").get<std::string>());
  g.expression = j.at("expression").get<std::string>();
  g.line = j.at("line").get<std::uint32_t>();
  g.enclosing_construct =
      guard_construct_from_string(j.at("enclosing_construct").get<std::string>());
  g.statement_token = java::kNoToken;
}

void to_json(json& j, const Finding& f) {
  j = json{{"pattern", to_string(f.pattern)}, {"line", f.line}, {"detail", f.detail}};
  j["reference_guard"] = f.reference_guard ? json(*f.reference_guard) : json(nullptr);
}

void from_json(const json& j, Finding& f) {
  f.pattern = pattern_from_string(j.at("pattern").get<std::string>());
  f.line = j.at("line").get<std::uint32_t>();
  f.detail = j.value("detail", std::string());
  if (j.contains("reference_guard") && !j["reference_guard"].is_null()) {
    f.reference_guard = j["reference_guard"].get<Guard>();
  } else {
    f.reference_guard.reset();
  }
}

void to_json(json& j, const IssueReport& r) {
  j = json{{"snippet_id", r.snippet_id}, {"findings", r.findings}};
  j["first_occurrence_line"] =
      r.first_occurrence_line ? json(*r.first_occurrence_line) : json(nullptr);
}

void from_json(const json& j, IssueReport& r) {
  r.snippet_id = j.at("snippet_id").get<std::string>();
  r.findings = j.at("findings").get<std::vector<Finding>>();
  if (j.contains("first_occurrence_line") && !j["first_occurrence_line"].is_null()) {
    r.first_occurrence_line = j["first_occurrence_line"].get<std::uint32_t>();
  } else {
    r.first_occurrence_line.reset();
  }
}

std::uint32_t body_open_line(const SyntaxTree& tree) {
  std::uint32_t line = 0;
  java::walk(tree.root(), [&](const Node& n) {
    if (line) return false;
    if (n.kind == NodeKind::MethodDecl && n.has(Node::kHasBody) && !n.children.empty() &&
        n.children.back().kind == NodeKind::Block) {
      line = tree.tokens()[n.children.back().first].line;
      return false;
    }
    return true;
  });
  return line;
}

GuardKind classify_expression(std::string_view expression) {
  SyntaxTree t = java::parse_expression(std::string(expression));
  if (t.root().children.empty()) return GuardKind::BooleanValueCheck;
  return classify(t, *peel_parens(&t.root().children.front()));
}

SyntaxTree parse_checked(const CodeSnippet& snippet) {
  SyntaxTree t = metrics::parse_snippet(snippet.source);
  if (!t.ok()) {
    const auto& e = t.errors().front();
    throw Error(ErrorKind::Format, "snippet '" + snippet.id + "' line " + std::to_string(e.line) +
                                       ": " + e.message);
  }
  return t;
}

std::vector<Guard> extract_guards(const SyntaxTree& tree) {
  const std::uint32_t body = body_open_line(tree);
  const auto stmts = statements(tree);
  auto enclosing = [&](std::uint32_t token) {
    std::uint32_t best = java::kNoToken;
    for (const Node* s : stmts)
      if (s->first <= token && token < s->last) best = s->first;
    return best;
  };

  struct Item {
    Guard guard;
    std::uint32_t token;
  };
  std::vector<Item> items;
  for (const auto& a : metrics::harvest_atoms(tree).atoms) {
    Guard g;
    g.kind = classify(tree, *a.node);
    g.expression = a.text;
    g.line = relative(a.line, body);
    switch (a.construct) {
      case metrics::Construct::While:
      case metrics::Construct::DoWhile: g.enclosing_construct = GuardConstruct::While; break;
      case metrics::Construct::For: g.enclosing_construct = GuardConstruct::For; break;
      case metrics::Construct::Ternary: g.enclosing_construct = GuardConstruct::Ternary; break;
      default: g.enclosing_construct = GuardConstruct::If; break;
    }
    g.statement_token = enclosing(a.node->first);
    items.push_back({std::move(g), a.node->first});
  }
  java::walk(tree.root(), [&](const Node& n) {
    if (n.kind == NodeKind::Assert && !n.children.empty()) {
      Guard g;
      g.kind = GuardKind::Assertion;
      g.expression = metrics::normalize_atom(tree.render(n.children[0]));
      g.line = relative(tree.line(n.children[0]), body);
      g.enclosing_construct = GuardConstruct::Assert;
      g.statement_token = n.first;
      items.push_back({std::move(g), n.children[0].first});
    } else if (n.kind == NodeKind::Try) {
      Guard g;
      g.kind = GuardKind::ErrorHandling;
      g.line = relative(tree.line(n), body);
      g.enclosing_construct = GuardConstruct::Try;
      g.statement_token = n.first;
      items.push_back({std::move(g), n.first});
    }
    return true;
  });
  std::stable_sort(items.begin(), items.end(),
                   [](const Item& a, const Item& b) { return a.token < b.token; });
  std::vector<Guard> out;
  out.reserve(items.size());
  for (auto& i : items) out.push_back(std::move(i.guard));
  return out;
}

std::vector<Guard> extract_guards(const CodeSnippet& snippet) {
  return extract_guards(parse_checked(snippet));
}

Canonical canonicalize(std::string_view expression) {
  Canonical c;
  SyntaxTree t = java::parse_expression(std::string(expression));
  const auto& toks = t.tokens();
  std::uint32_t first = 0;
  std::uint32_t last = toks.empty() ? 0 : static_cast<std::uint32_t>(toks.size() - 1);
  std::uint32_t root_op = java::kNoToken;
  std::vector<bool> keep(toks.size(), false);
  if (!t.root().children.empty()) {
    const Node* root = peel_parens(&t.root().children.front());
    first = root->first;
    last = root->last;
    if (is_op(t, *root, {"==", "!=", "<", "<=", ">", ">="})) root_op = root->op;
    java::walk(t.root(), [&](const Node& n) {
      if (n.kind == NodeKind::Type || n.kind == NodeKind::ClassLiteral) {
        for (std::uint32_t i = n.first; i < n.last && i < keep.size(); ++i) keep[i] = true;
        return false;
      }
      return true;
    });
  }
  std::unordered_map<std::string, std::size_t> slot;
  for (std::uint32_t i = first; i < last && i < toks.size(); ++i) {
    if (toks[i].kind == TokenKind::Eof) break;
    std::string tx(t.text(i));
    if (i < t.roles().size() && t.roles()[i] == java::TokenRole::SpacedCont) continue;
    if (toks[i].kind == TokenKind::Operator) tx = op_text(t, i);
    std::string ex = tx;
    std::string lo = tx;
    if (toks[i].kind == TokenKind::Identifier && !keep[i]) {
      auto [it, fresh] = slot.emplace(tx, c.bindings.size());
      if (fresh) c.bindings.push_back(tx);
      ex = lo = "$" + std::to_string(it->second);
    } else if (toks[i].kind == TokenKind::Number || toks[i].kind == TokenKind::String ||
               toks[i].kind == TokenKind::Char) {
      lo = "#";
    } else if (i == root_op) {
      if (tx == "!=") ex = "==";
      if (tx == ">=") ex = "<";
      if (tx == "<=") ex = ">";
      lo = (tx == "==" || tx == "!=") ? "==" : "<>";
    }
    if (!c.exact.empty()) {
      c.exact.push_back(' ');
      c.loose.push_back(' ');
    }
    c.exact += ex;
    c.loose += lo;
  }
  return c;
}

Matching match_guards(const std::vector<Guard>& gen, const std::vector<Guard>& ref) {
  Matching m;
  std::vector<Canonical> gc, rc;
  for (const auto& g : gen) gc.push_back(canonicalize(g.expression));
  for (const auto& r : ref) rc.push_back(canonicalize(r.expression));
  const auto go = line_order(gen);
  const auto ro = line_order(ref);
  std::vector<bool> gen_used(gen.size(), false), ref_used(ref.size(), false);

  auto pass = [&](int number, auto&& same) {
    for (std::size_t r : ro) {
      if (ref_used[r]) continue;
      for (std::size_t g : go) {
        if (gen_used[g] || gen[g].kind != ref[r].kind || !same(g, r)) continue;
        gen_used[g] = ref_used[r] = true;
        m.pairs.push_back({g, r, number});
        break;
      }
    }
  };
  pass(1, [&](std::size_t g, std::size_t r) { return gen[g].expression == ref[r].expression; });
  pass(2, [&](std::size_t g, std::size_t r) { return gc[g].exact == rc[r].exact; });
  pass(3, [&](std::size_t g, std::size_t r) { return gc[g].loose == rc[r].loose; });

  for (std::size_t r : ro)
    if (!ref_used[r]) m.unmatched_ref.push_back(r);
  for (std::size_t g : go)
    if (!gen_used[g]) m.unmatched_gen.push_back(g);
  return m;
}

std::uint32_t localize(const SyntaxTree& generated, const SyntaxTree& reference,
                       const Guard& reference_guard) {
  const auto rs = statements(reference);
  std::size_t p = rs.size();
  for (std::size_t i = 0; i < rs.size(); ++i) {
    if (rs[i]->first == reference_guard.statement_token) {
      p = i;
      break;
    }
  }
  if (p == rs.size()) {
    // no token: fall back to the first statement starting at the guard's line
    const std::uint32_t body = body_open_line(reference);
    for (std::size_t i = 0; i < rs.size(); ++i) {
      if (relative(reference.line(*rs[i]), body) >= reference_guard.line) {
        p = i;
        break;
      }
    }
  }
  const auto gs = statements(generated);
  std::vector<std::string> gen_keys;
  gen_keys.reserve(gs.size());
  for (const Node* s : gs) gen_keys.push_back(statement_key(generated, *s));
  const std::uint32_t gen_body = body_open_line(generated);
  for (std::size_t q = p; q-- > 0;) {
    const std::string key = statement_key(reference, *rs[q]);
    for (std::size_t k = 0; k < gs.size(); ++k) {
      if (gen_keys[k] == key)
        return relative(statement_anchor_line(generated, *gs[k]), gen_body) + 1;
    }
  }
  return 1;
}

IssueReport diff_findings(const SyntaxTree& generated, const SyntaxTree& reference,
                          const std::set<std::string>& scope_symbols, std::string snippet_id,
                          DiffOptions options) {
  if (scope_symbols.empty() && options.strict_scope)
    throw Error(ErrorKind::ScopeTableMissing, "no scope symbols for '" + snippet_id + "'");
  IssueReport report;
  report.snippet_id = std::move(snippet_id);
  const auto gen = extract_guards(generated);
  const auto ref = extract_guards(reference);
  const Matching m = match_guards(gen, ref);
  const std::set<std::string> ref_ids = identifiers(reference);

  for (std::size_t r : m.unmatched_ref) {
    Finding f;
    f.pattern = missing_pattern(ref[r].kind);
    f.line = localize(generated, reference, ref[r]);
    f.reference_guard = ref[r];
    f.detail = ref[r].expression;
    report.findings.push_back(std::move(f));
  }
  for (const auto& p : m.pairs) {
    bool inconsistent = p.pass == 3;
    if (p.pass == 2) {
      // same shape, but the generated side picked another variable the
      // reference also uses
      const Canonical g = canonicalize(gen[p.gen].expression);
      const Canonical r = canonicalize(ref[p.ref].expression);
      for (std::size_t i = 0; i < g.bindings.size() && i < r.bindings.size(); ++i) {
        if (g.bindings[i] != r.bindings[i] && ref_ids.count(g.bindings[i])) {
          inconsistent = true;
          break;
        }
      }
    }
    if (inconsistent) {
      Finding f;
      f.pattern = Pattern::InconsistentExpression;
      f.line = gen[p.gen].line;
      f.reference_guard = ref[p.ref];
      f.detail = gen[p.gen].expression;
      report.findings.push_back(std::move(f));
    }
  }
  if (!scope_symbols.empty()) {
    std::set<std::string> allowed = scope_symbols;
    allowed.merge(declared_names(generated));
    allowed.insert(ref_ids.begin(), ref_ids.end());
    for (const auto& g : gen) {
      if (g.expression.empty()) continue;
      for (const auto& name : free_names(g.expression)) {
        if (capitalized(name) || allowed.count(name)) continue;
        Finding f;
        f.pattern = Pattern::ErroneousExpression;
        f.line = g.line;
        f.detail = g.expression;
        report.findings.push_back(std::move(f));
        break;
      }
    }
  }
  finalize(report);
  return report;
}

IssueReport diff_findings(const CodeSnippet& generated, const CodeSnippet& reference,
                          const std::set<std::string>& scope_symbols, DiffOptions options) {
  if (scope_symbols.empty() && options.strict_scope)
    throw Error(ErrorKind::ScopeTableMissing, "no scope symbols for '" + generated.id + "'");
  return diff_findings(parse_checked(generated), parse_checked(reference), scope_symbols,
                       generated.id, options);
}

std::map<std::uint32_t, double> line_distribution(const std::vector<IssueReport>& reports) {
  std::map<std::uint32_t, std::size_t> counts;
  std::size_t n = 0;
  for (const auto& r : reports) {
    if (r.findings.empty()) continue;
    std::uint32_t line = r.first_occurrence_line.value_or(r.findings.front().line);
    ++counts[line];
    ++n;
  }
  if (n == 0) throw Error(ErrorKind::EmptyInput, "no report has findings");
  std::map<std::uint32_t, double> out;
  for (const auto& [line, c] : counts)
    out[line] = static_cast<double>(c) / static_cast<double>(n);
  return out;
}

std::vector<PatternPair> load_pairs(const std::string& path) {
  std::vector<PatternPair> out;
  std::size_t row = 0;
  for (const auto& j : io::read_jsonl(path)) {
    ++row;
    try {
      PatternPair p;
      p.id = j.at("id").get<std::string>();
      p.generated = j.at("generated").get<std::string>();
      p.reference = j.at("reference").get<std::string>();
      if (j.contains("scope_symbols"))
        for (const auto& s : j["scope_symbols"]) p.scope_symbols.insert(s.get<std::string>());
      out.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Format, path + " row " + std::to_string(row) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace robgen::patterns
