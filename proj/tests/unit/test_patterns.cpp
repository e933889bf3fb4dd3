#include "doctest.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "../support/pattern_fixtures.hpp"
#include "json.hpp"
#include "robgen/error.hpp"
#include "robgen/java/lexer.hpp"
#include "robgen/java/parser.hpp"
#include "robgen/patterns/patterns.hpp"

using namespace robgen;
using namespace robgen::patterns;

namespace {

const std::filesystem::path kPairs =
    std::filesystem::path(ROBGEN_FIXTURES) / "patterns" / "pairs.json";

CodeSnippet method(const std::string& body, std::string id = "t") {
  return {std::move(id), "void f(String str, int[] a, int i, boolean flag) {\n" + body + "\n}\n",
          Origin::Generated, "java"};
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

// Consistent renaming of variable-like identifiers: lowercase names that are
// neither member accesses nor call targets. Types and API names stay put so
// the rename cannot change what a guard means.
std::string rename(const std::string& src, std::map<std::string, std::string>& map) {
  auto lx = java::lex(src);
  std::string out;
  std::size_t at = 0;
  for (std::size_t i = 0; i < lx.tokens.size(); ++i) {
    const auto& t = lx.tokens[i];
    if (t.kind != java::TokenKind::Identifier) continue;
    std::string name = src.substr(t.offset, t.length);
    if (!std::islower(static_cast<unsigned char>(name[0]))) continue;
    bool after_dot = i > 0 && src.compare(lx.tokens[i - 1].offset, lx.tokens[i - 1].length, ".") == 0;
    bool before_call = i + 1 < lx.tokens.size() &&
                       src.compare(lx.tokens[i + 1].offset, lx.tokens[i + 1].length, "(") == 0;
    if (after_dot || before_call) continue;
    auto [it, fresh] = map.emplace(name, "q" + std::to_string(map.size()) + "_" + name);
    out += src.substr(at, t.offset - at);
    out += it->second;
    at = t.offset + t.length;
  }
  out += src.substr(at);
  return out;
}

std::multiset<std::pair<int, std::string>> finding_keys(const IssueReport& r) {
  std::multiset<std::pair<int, std::string>> out;
  for (const auto& f : r.findings)
    out.emplace(static_cast<int>(f.pattern),
                f.reference_guard ? f.reference_guard->expression : f.detail);
  return out;
}

std::string insert_after_signature(const std::string& src, const std::string& stmt) {
  auto nl = src.find('\n');
  return src.substr(0, nl + 1) + "    " + stmt + "\n" + src.substr(nl + 1);
}

}  // namespace

TEST_CASE("guard extraction and classification") {
  auto g = extract_guards(method("    if (str == null) return;"));
  REQUIRE(g.size() == 1);
  CHECK(g[0].kind == GuardKind::NullCheck);
  CHECK(g[0].expression == "str == null");
  CHECK(g[0].line == 1);
  CHECK(g[0].enclosing_construct == GuardConstruct::If);

  CHECK(extract_guards(method("if (i < size) {}"))[0].kind == GuardKind::RangeCheck);
  auto flag = extract_guards(method("if (flag) {}"));
  CHECK(flag[0].kind == GuardKind::BooleanValueCheck);
  CHECK(flag[0].expression == "flag");

  const std::vector<std::pair<std::string, GuardKind>> table{
      {"null != x", GuardKind::NullCheck},
      {"o instanceof String s", GuardKind::TypeCheck},
      {"a.length == 0", GuardKind::SpecificValueCheck},
      {"k != -1", GuardKind::SpecificValueCheck},
      {"c == 'x'", GuardKind::SpecificValueCheck},
      {"s.isEmpty()", GuardKind::SpecificValueCheck},
      {"a == b", GuardKind::SpecificValueCheck},
      {"i >= n", GuardKind::RangeCheck},
      {"m.get(k) <= limit", GuardKind::RangeCheck},
      {"isReady()", GuardKind::BooleanValueCheck},
      {"this.open", GuardKind::BooleanValueCheck},
      {"s.equals(t)", GuardKind::BooleanValueCheck},
      {"(x == null)", GuardKind::NullCheck},
  };
  for (const auto& [expr, want] : table) {
    CAPTURE(expr);
    CHECK(classify_expression(expr) == want);
  }

  // mixed condition is split first, negation peeled, then each leaf classified
  auto mixed = extract_guards(method("    while (str != null && !isReady() && i > 0) { i--; }"));
  REQUIRE(mixed.size() == 3);
  CHECK(mixed[0].kind == GuardKind::NullCheck);
  CHECK(mixed[1].kind == GuardKind::BooleanValueCheck);
  CHECK(mixed[1].expression == "isReady()");
  CHECK(mixed[2].kind == GuardKind::RangeCheck);
  CHECK(mixed[2].enclosing_construct == GuardConstruct::While);

  auto other = extract_guards(method(
      "    assert a != null : \"a\";\n"
      "    for (int k = 0; k < a.length; k++) {}\n"
      "    int v = flag ? 1 : 0;\n"
      "    do { i++; } while (i < 3);\n"
      "    try { run(); } catch (Exception e) {}"));
  REQUIRE(other.size() == 5);
  CHECK(other[0].kind == GuardKind::Assertion);
  CHECK(other[0].expression == "a != null");
  CHECK(other[0].line == 1);
  CHECK(other[1].enclosing_construct == GuardConstruct::For);
  CHECK(other[1].line == 2);
  CHECK(other[2].enclosing_construct == GuardConstruct::Ternary);
  CHECK(other[3].enclosing_construct == GuardConstruct::While);
  CHECK(other[4].kind == GuardKind::ErrorHandling);
  CHECK(other[4].expression.empty());
  CHECK(other[4].line == 5);

  CHECK(kind_of([] { extract_guards(method("    if (x == ) {")); }) == ErrorKind::Format);
  CHECK(kind_of([] { extract_guards(CodeSnippet{"e", "  ", Origin::Generated, "java"}); }) ==
        ErrorKind::EmptySource);
}

TEST_CASE("matching") {
  auto guard = [](GuardKind k, std::string e, std::uint32_t line = 1) {
    Guard g;
    g.kind = k;
    g.expression = std::move(e);
    g.line = line;
    return g;
  };
  auto m = match_guards({guard(GuardKind::NullCheck, "childNode == null")},
                        {guard(GuardKind::NullCheck, "child == null")});
  REQUIRE(m.pairs.size() == 1);
  CHECK(m.pairs[0].pass == 2);

  m = match_guards({guard(GuardKind::NullCheck, "a == null")},
                   {guard(GuardKind::SpecificValueCheck, "a.length == 0")});
  CHECK(m.pairs.empty());
  CHECK(m.unmatched_ref == std::vector<std::size_t>{0});
  CHECK(m.unmatched_gen == std::vector<std::size_t>{0});

  m = match_guards({guard(GuardKind::RangeCheck, "len < head")},
                   {guard(GuardKind::RangeCheck, "len < size")});
  REQUIRE(m.pairs.size() == 1);
  CHECK(m.pairs[0].pass == 2);

  m = match_guards({guard(GuardKind::RangeCheck, "A <= B")},
                   {guard(GuardKind::RangeCheck, "A < B")});
  REQUIRE(m.pairs.size() == 1);
  CHECK(m.pairs[0].pass == 3);

  // exact text wins over an earlier structural candidate
  m = match_guards({guard(GuardKind::NullCheck, "b == null", 1), guard(GuardKind::NullCheck, "a == null", 2)},
                   {guard(GuardKind::NullCheck, "a == null", 1)});
  REQUIRE(m.pairs.size() == 1);
  CHECK(m.pairs[0].gen == 1);
  CHECK(m.pairs[0].pass == 1);

  // each guard matches at most once
  m = match_guards({guard(GuardKind::NullCheck, "a == null")},
                   {guard(GuardKind::NullCheck, "a == null"), guard(GuardKind::NullCheck, "a == null", 3)});
  CHECK(m.pairs.size() == 1);
  CHECK(m.unmatched_ref == std::vector<std::size_t>{1});

  auto c = canonicalize("x != null && y.size() > LIMIT");
  CHECK(c.bindings == std::vector<std::string>{"x", "y", "size", "LIMIT"});
  CHECK(canonicalize("i < n").exact == canonicalize("k >= m").exact);
  CHECK(canonicalize("i < n").exact != canonicalize("k <= m").exact);
  CHECK(canonicalize("i < n").loose == canonicalize("k <= m").loose);
  CHECK(canonicalize("o instanceof String").exact != canonicalize("o instanceof Integer").exact);
  CHECK(canonicalize("r > 3").exact != canonicalize("r > 5").exact);
  CHECK(canonicalize("r > 3").loose == canonicalize("r > 5").loose);
}

TEST_CASE("worked examples for diff and localize") {
  const std::set<std::string> none;
  CodeSnippet ref{"r", "String f(String str) {\n  if (str == null) return null;\n  return str;\n}\n",
                  Origin::Reference, "java"};
  CodeSnippet gen{"g", "String f(String str) {\n  return str;\n}\n", Origin::Generated, "java"};
  auto r = diff_findings(gen, ref, none);
  REQUIRE(r.findings.size() == 1);
  CHECK(r.findings[0].pattern == Pattern::MissingNullCheck);
  CHECK(r.findings[0].line == 1);
  REQUIRE(r.findings[0].reference_guard);
  CHECK(r.findings[0].reference_guard->expression == "str == null");
  CHECK(r.first_occurrence_line == 1u);
  CHECK(diff_findings(ref, ref, none).findings.empty());

  CodeSnippet lt{"r", "int f(int A, int B) {\n  if (A < B) return 1;\n  return 0;\n}\n",
                 Origin::Reference, "java"};
  CodeSnippet le{"g", "int f(int A, int B) {\n  if (A <= B) return 1;\n  return 0;\n}\n",
                 Origin::Generated, "java"};
  r = diff_findings(le, lt, none);
  REQUIRE(r.findings.size() == 1);
  CHECK(r.findings[0].pattern == Pattern::InconsistentExpression);
  CHECK(r.findings[0].detail == "A <= B");

  // anchor after sort(items);
  auto rt = parse_checked({"r", "void p(List<Item> items) {\n  log();\n  sort(items);\n  if (items.size() > MAX) return;\n  use(items);\n}\n"});
  auto gt = parse_checked({"g", "void p(List<Item> items) {\n  prepare();\n  validate();\n  sort(items);\n  use(items);\n}\n"});
  auto guards = extract_guards(rt);
  REQUIRE(guards.size() == 1);
  CHECK(localize(gt, rt, guards[0]) == 4);
  // same guard without token info falls back to its line
  Guard detached = guards[0];
  detached.statement_token = java::kNoToken;
  CHECK(localize(gt, rt, detached) == 4);

  auto empty = parse_checked({"g", "void p(List<Item> items) {\n}\n"});
  CHECK(localize(empty, rt, guards[0]) == 1);

  CHECK(kind_of([&] { diff_findings(gen, ref, none, DiffOptions{true}); }) ==
        ErrorKind::ScopeTableMissing);
  CHECK_NOTHROW(diff_findings(gen, ref, {"str"}, DiffOptions{true}));
}

TEST_CASE("labelled fixture pairs") {
  auto pairs = fixtures::load_labelled(kPairs);
  REQUIRE(pairs.size() >= 25);
  std::vector<IssueReport> reports;
  for (const auto& p : pairs) {
    CAPTURE(p.id);
    reports.push_back(fixtures::run_pair(p));
    // identity on both sides of every pair
    for (const auto* src : {&p.generated, &p.reference}) {
      CodeSnippet s{p.id, *src, Origin::Generated, "java"};
      CHECK(diff_findings(s, s, p.scope).findings.empty());
      CHECK(diff_findings(s, s, {}).findings.empty());
    }
  }

  auto it = std::find_if(pairs.begin(), pairs.end(),
                         [](const auto& p) { return p.id == "p01-entry-null-check"; });
  REQUIRE(it != pairs.end());
  const auto& entry_pair = reports[static_cast<std::size_t>(it - pairs.begin())];
  REQUIRE(entry_pair.findings.size() == 1);
  CHECK(entry_pair.findings[0].pattern == Pattern::MissingNullCheck);
  CHECK(entry_pair.findings[0].line == 1);

  auto s = fixtures::score(pairs, reports);
  std::string table = "pattern                        tp  fp  fn  precision  recall\n";
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t k = 0; k < kPatternCount; ++k) {
    char row[128];
    std::snprintf(row, sizeof row, "%-30s %3zu %3zu %3zu  %9.3f  %6.3f\n",
                  std::string(to_string(static_cast<Pattern>(k))).c_str(), s[k].tp, s[k].fp,
                  s[k].fn, s[k].precision(), s[k].recall());
    table += row;
    tp += s[k].tp;
    fp += s[k].fp;
    fn += s[k].fn;
  }
  MESSAGE(table);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    std::string got;
    for (const auto& f : reports[i].findings)
      got += std::string(to_string(f.pattern)) + "@" + std::to_string(f.line) + " ";
    std::string want;
    for (const auto& [p, l] : pairs[i].expected)
      want += std::string(to_string(p)) + "@" + std::to_string(l) + " ";
    if (got != want) MESSAGE(pairs[i].id << ": labelled [" << want << "] detected [" << got << "]");
  }
  // every pattern is exercised by at least one label
  for (std::size_t k = 0; k < kPatternCount; ++k) {
    CAPTURE(to_string(static_cast<Pattern>(k)));
    CHECK(s[k].tp + s[k].fn > 0);
  }
  const double micro_p = double(tp) / double(tp + fp);
  const double micro_r = double(tp) / double(tp + fn);
  MESSAGE("micro precision " << micro_p << " recall " << micro_r);
  CHECK(micro_p >= 0.75);
  CHECK(micro_r >= 0.75);
}

TEST_CASE("alpha renaming does not change findings") {
  for (const auto& p : fixtures::load_labelled(kPairs)) {
    CAPTURE(p.id);
    std::map<std::string, std::string> map;
    auto g = rename(p.generated, map);
    auto r = rename(p.reference, map);
    std::set<std::string> scope;
    for (const auto& s : p.scope) scope.insert(map.count(s) ? map[s] : s);
    auto before = fixtures::run_pair(p);
    auto after = diff_findings(CodeSnippet{p.id, g, Origin::Generated, "java"},
                               CodeSnippet{p.id, r, Origin::Reference, "java"}, scope);
    REQUIRE(before.findings.size() == after.findings.size());
    for (std::size_t i = 0; i < before.findings.size(); ++i) {
      CHECK(before.findings[i].pattern == after.findings[i].pattern);
      CHECK(before.findings[i].line == after.findings[i].line);
    }
  }
}

TEST_CASE("adding the missing guard removes exactly that finding") {
  std::size_t checked = 0;
  for (const auto& p : fixtures::load_labelled(kPairs)) {
    auto base = fixtures::run_pair(p);
    for (const auto& f : base.findings) {
      if (!is_missing(f.pattern)) continue;
      const Guard& g = *f.reference_guard;
      std::string stmt;
      if (g.kind == GuardKind::Assertion) {
        stmt = "assert " + g.expression + ";";
      } else if (g.kind == GuardKind::ErrorHandling) {
        stmt = "try { } catch (RuntimeException ex) { }";
      } else {
        stmt = "if (" + g.expression + ") { }";
      }
      auto q = p;
      q.generated = insert_after_signature(p.generated, stmt);
      CAPTURE(p.id);
      CAPTURE(stmt);
      auto want = finding_keys(base);
      want.erase(want.find({static_cast<int>(f.pattern), g.expression}));
      CHECK(finding_keys(fixtures::run_pair(q)) == want);
      ++checked;
    }
  }
  CHECK(checked >= 15);
}

TEST_CASE("random snippets: identity and determinism") {
  std::mt19937 rng(7);
  const std::vector<std::string> conds{"a == null", "a.length == 0", "i < a.length", "flag",
                                       "!isReady()", "str instanceof Object", "i != -1",
                                       "str.isEmpty()", "i >= 0 && i <= 9", "(flag || i > 2)"};
  const std::vector<std::string> plain{"i++;", "use(a);", "str = str.trim();", "return;",
                                       "int k = i * 2;"};
  for (int n = 0; n < 200; ++n) {
    std::string body;
    int stmts = 1 + static_cast<int>(rng() % 8);
    for (int s = 0; s < stmts; ++s) {
      const auto& c = conds[rng() % conds.size()];
      switch (rng() % 6) {
        case 0: body += "    if (" + c + ") { " + plain[rng() % plain.size()] + " }\n"; break;
        case 1: body += "    while (" + c + ") { i--; }\n"; break;
        case 2: body += "    assert " + c + ";\n"; break;
        case 3: body += "    try { use(a); } catch (RuntimeException e) { }\n"; break;
        case 4: body += "    int t" + std::to_string(s) + " = " + c + " ? 1 : 0;\n"; break;
        default: body += "    " + plain[rng() % 4] + "\n"; break;
      }
    }
    auto x = method(body);
    CAPTURE(body);
    CHECK(diff_findings(x, x, {"use", "isReady"}).findings.empty());
    auto empty = method("");
    auto a = diff_findings(empty, x, {"use"});
    auto b = diff_findings(empty, x, {"use"});
    CHECK(a == b);
    // against an empty body every reference guard is missing, all at line 1
    CHECK(a.findings.size() == extract_guards(x).size());
    for (const auto& f : a.findings) CHECK(f.line == 1);
  }
}

TEST_CASE("serialization and line distribution") {
  auto pairs = fixtures::load_labelled(kPairs);
  std::set<std::string> names;
  for (const auto& p : pairs) {
    auto r = fixtures::run_pair(p);
    nlohmann::json j = r;
    auto back = nlohmann::json::parse(j.dump()).get<IssueReport>();
    CHECK(back == r);
    for (const auto& f : j["findings"]) names.insert(f["pattern"].get<std::string>());
    if (r.findings.empty()) {
      CHECK(j["first_occurrence_line"].is_null());
    } else {
      CHECK(j["first_occurrence_line"] == r.findings.front().line);
      for (const auto& f : r.findings) {
        CHECK(f.line >= *r.first_occurrence_line);
        if (is_missing(f.pattern)) CHECK(f.reference_guard.has_value());
        else CHECK(!f.detail.empty());
      }
    }
  }
  for (std::size_t k = 0; k < kPatternCount; ++k) {
    auto p = static_cast<Pattern>(k);
    CHECK(pattern_from_string(to_string(p)) == p);
  }
  CHECK(kind_of([] { pattern_from_string("missing_semicolon"); }) == ErrorKind::Format);

  auto rep = [](std::optional<std::uint32_t> line) {
    IssueReport r;
    if (line) r.findings.push_back(Finding{Pattern::MissingNullCheck, *line, Guard{}, ""});
    r.first_occurrence_line = line;
    return r;
  };
  auto d = line_distribution({rep(1), rep(1), rep(3), rep(std::nullopt)});
  REQUIRE(d.size() == 2);
  CHECK(d[1] == doctest::Approx(2.0 / 3.0));
  CHECK(d[3] == doctest::Approx(1.0 / 3.0));
  CHECK(line_distribution({rep(1), rep(1)}) == std::map<std::uint32_t, double>{{1, 1.0}});
  CHECK(kind_of([&] { line_distribution({rep(std::nullopt)}); }) == ErrorKind::EmptyInput);
  CHECK(kind_of([] { line_distribution({}); }) == ErrorKind::EmptyInput);

  // ten real pairs: seven entry checks dropped, three checks dropped after an
  // anchor statement at increasing depth
  std::vector<IssueReport> reports;
  for (int k = 0; k < 10; ++k) {
    std::string pre;
    int depth = k < 7 ? 0 : k - 6;
    for (int s = 0; s < depth; ++s) pre += "  step" + std::to_string(s) + "(x);\n";
    std::string ref = "void m(Object x) {\n" + pre + "  if (x == null) return;\n  use(x);\n}\n";
    std::string gen = "void m(Object x) {\n" + pre + "  use(x);\n}\n";
    reports.push_back(diff_findings(CodeSnippet{"g", gen, Origin::Generated, "java"},
                                    CodeSnippet{"r", ref, Origin::Reference, "java"}, {"use"}));
  }
  d = line_distribution(reports);
  CHECK(d[1] == doctest::Approx(0.7));
  CHECK(d[2] == doctest::Approx(0.1));
  CHECK(d[3] == doctest::Approx(0.1));
  CHECK(d[4] == doctest::Approx(0.1));
  double sum = 0;
  for (const auto& [line, f] : d) sum += f;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}
