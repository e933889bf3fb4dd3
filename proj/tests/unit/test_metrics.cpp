#include "doctest.h"

#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "robgen/error.hpp"
#include "robgen/io.hpp"
#include "robgen/java/parser.hpp"
#include "robgen/metrics/atoms.hpp"
#include "robgen/metrics/corpus.hpp"

using namespace robgen;
using namespace robgen::metrics;

namespace {

const std::filesystem::path kDir = std::filesystem::path(ROBGEN_FIXTURES) / "metrics";

CodeSnippet wrap(const std::string& body, std::string id = "t") {
  return {std::move(id), "void f() {\n" + body + "\n}\n", Origin::Generated, "java"};
}

std::set<std::string> atoms_of(const std::string& body) { return extract_atoms(wrap(body)).atoms; }

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

// Random condition trees. The oracle atom set is simply the set of leaves,
// which are drawn from already-canonical strings.
struct CondGen {
  std::mt19937 rng;
  std::vector<std::string> pool{"a != null", "a.length > 0", "isValid()", "x > 5", "i < n",
                                "s.isEmpty()", "flag", "o instanceof String", "k == -1",
                                "m.get(k) >= limit", "(n = in.read()) != -1", "x > 5 ? a : b"};

  std::string gen(int depth, std::set<std::string>& leaves) {
    int pick = depth <= 0 ? 0 : static_cast<int>(rng() % 5);
    switch (pick) {
      case 1: return gen(depth - 1, leaves) + " && " + gen(depth - 1, leaves);
      case 2: return gen(depth - 1, leaves) + "   ||\n  " + gen(depth - 1, leaves);
      case 3: return "!(" + gen(depth - 1, leaves) + ")";
      case 4: return "((" + gen(depth - 1, leaves) + "))";
      default: {
        std::string leaf = pool[rng() % pool.size()];
        // a ternary leaf contributes its own condition as well
        if (leaf == "x > 5 ? a : b") {
          leaves.insert("x > 5");
          leaf = "(" + leaf + ") == c";
        }
        leaves.insert(leaf);
        if (leaf.find(' ') != std::string::npos) return "(" + leaf + ")";
        return leaf;
      }
    }
  }
};

}  // namespace

TEST_CASE("parse_snippet contract") {
  auto t = parse_snippet("void f(){}");
  CHECK(t.ok());
  CHECK(java::count_kind(t.root(), java::NodeKind::MethodDecl) == 1);

  auto bad = parse_snippet("void f(){ if(x");
  REQUIRE_FALSE(bad.ok());
  CHECK(bad.errors().front().line == 1);

  CHECK(kind_of([] { parse_snippet(""); }) == ErrorKind::EmptySource);
  CHECK(kind_of([] { parse_snippet("  \n\t "); }) == ErrorKind::EmptySource);
  CHECK(kind_of([] { parse_snippet("x = 1;"); }) == ErrorKind::NoMethodFound);
}

TEST_CASE("atom extraction examples") {
  CHECK(atoms_of("if (a != null && a.length > 0) {}") == std::set<std::string>{"a != null", "a.length > 0"});
  CHECK(atoms_of("if (isValid()) {}") == std::set<std::string>{"isValid()"});
  CHECK(atoms_of("if (!(x > 5 || x > 5)) {}") == std::set<std::string>{"x > 5"});
  CHECK(atoms_of("if (x>5) {} while(x   >  5) {}").size() == 1);
  CHECK(atoms_of("int y = x > 5 ? x : -x;") == std::set<std::string>{"x > 5"});
  CHECK(atoms_of("for (int i = 0; i < n; i++) {}") == std::set<std::string>{"i < n"});
  CHECK(atoms_of("for (;;) { break; }").empty());
  CHECK(atoms_of("for (String s : items) {}").empty());
  CHECK(atoms_of("switch (k) { case 1: break; }").empty());
  CHECK(atoms_of("assert x != null;").empty());
  CHECK(atoms_of("do { x--; } while (x > 0 && !done);") == std::set<std::string>{"x > 0", "done"});
  CHECK(atoms_of("boolean b = p && q;").empty());
}

TEST_CASE("normalization") {
  CHECK(normalize_atom("  ( ( a   !=\n null ) ) ") == "a != null");
  CHECK(normalize_atom("!isReady()") == "isReady()");
  CHECK(normalize_atom("!!(x)") == "x");
  CHECK(normalize_atom("(n = in.read(buf)) != -1") == "(n = in.read(buf)) != -1");
  CHECK(normalize_atom("a  <") == "a <");  // unparseable falls back to whitespace collapse
  for (std::string s : {"a != null", "x>>>2", "(String) o == s", "m.<T>get() != null", "!(a)"}) {
    std::string once = normalize_atom(s);
    CHECK(normalize_atom(once) == once);
  }
}

TEST_CASE("annotated fixture corpus") {
  auto ann = nlohmann::json::parse(io::read_file(kDir / "annotations.json"));
  auto corpus = load_corpus(kDir.string());
  REQUIRE(corpus.size() == 12);

  std::size_t total = 0, with_try = 0, with_catch = 0;
  for (const auto& s : corpus) {
    CAPTURE(s.id);
    const auto& want = ann["snippets"][s.id];
    std::set<std::string> expected = want["atoms"].get<std::set<std::string>>();
    AtomSet got = extract_atoms(s);
    CHECK(got.atoms == expected);
    CHECK(got.count == got.atoms.size());
    CHECK(got.skipped_conditions == 0);
    CHECK(has_exception_handling(s) == want["has_try"].get<bool>());
    CHECK(has_exception_handling(s, {.strict_catch = true}) == want["has_catch"].get<bool>());
    total += expected.size();
    with_try += want["has_try"].get<bool>();
    with_catch += want["has_catch"].get<bool>();
  }
  REQUIRE(total == ann["totals"]["atoms"].get<std::size_t>());

  CorpusMetrics m = corpus_metrics(corpus);
  CHECK(m.n_snippets == 12);
  CHECK(m.avg_abe == doctest::Approx(static_cast<double>(total) / 12.0));
  CHECK(m.ehar == doctest::Approx(static_cast<double>(with_try) / 12.0));
  CHECK(m.ehar == doctest::Approx(3.0 / 12.0));
  CHECK(m.excluded.empty());

  CorpusMetrics strict = corpus_metrics(corpus, {.exception_handling = {.strict_catch = true}});
  CHECK(strict.ehar == doctest::Approx(static_cast<double>(with_catch) / 12.0));
  CHECK(strict.ehar == doctest::Approx(2.0 / 12.0));

  // parallel evaluation merges in input order
  CorpusMetrics par = corpus_metrics(corpus, {.jobs = 4});
  CHECK(nlohmann::json(par).dump() == nlohmann::json(m).dump());
}

TEST_CASE("corpus arithmetic") {
  CorpusMetrics m = corpus_metrics({wrap("if (a) {}", "one"), wrap("if (a && b || c) {}", "three")});
  CHECK(m.avg_abe == 2.0);
  CHECK(m.ehar == 0.0);
  CHECK(m.per_snippet[0].id == "one");
  CHECK(m.per_snippet[1].id == "three");

  std::vector<CodeSnippet> four{wrap("try { io(); } catch (IOException e) {}", "a"), wrap("", "b"),
                                wrap("x++;", "c"), wrap("y++;", "d")};
  CHECK(corpus_metrics(four).ehar == 0.25);

  CHECK(kind_of([] { corpus_metrics({}); }) == ErrorKind::EmptyCorpus);
  CHECK(kind_of([] { aggregate({}); }) == ErrorKind::EmptyCorpus);
}

TEST_CASE("unparseable snippets are excluded and listed") {
  std::vector<CodeSnippet> in{wrap("if (a) {}", "good"), {"broken", "void g() { if (x", Origin::Generated, "java"},
                              {"prose", "no code here", Origin::Generated, "java"}};
  CorpusMetrics m = corpus_metrics(in);
  CHECK(m.n_snippets == 1);
  REQUIRE(m.excluded.size() == 2);
  CHECK(m.excluded[0].id == "broken");
  CHECK(m.excluded[1].id == "prose");
  CHECK(m.excluded[1].reason.find("NoMethodFound") != std::string::npos);

  // conditions in broken regions are skipped and counted
  auto t = java::parse_source("void f() { if (a) {} while (b +) {} }");
  AtomSet s = extract_atoms(t, "x");
  CHECK(s.atoms.count("a") == 1);
  CHECK(s.skipped_conditions == 1);
}

TEST_CASE("json and csv output") {
  CorpusMetrics m = corpus_metrics({wrap("if (a) {}", "x,1"), wrap("try {} finally {}", "y")});
  auto j = nlohmann::json(m);
  CorpusMetrics back = j.get<CorpusMetrics>();
  CHECK(nlohmann::json(back) == j);
  CHECK(to_csv(m) == "id,atom_count,has_try_catch\n\"x,1\",1,false\ny,0,true\n");
}

TEST_CASE("property: random conditions decompose to exactly their leaves") {
  CondGen g{std::mt19937(20240611)};
  for (int trial = 0; trial < 300; ++trial) {
    std::set<std::string> leaves;
    std::string cond = g.gen(static_cast<int>(g.rng() % 5), leaves);
    CAPTURE(cond);
    AtomSet got = extract_atoms(wrap("if (" + cond + ") { go(); }"));
    CHECK(got.atoms == leaves);
    for (const auto& atom : got.atoms) {
      // soundness: no top-level && or || once re-parsed
      auto t = java::parse_expression(atom);
      REQUIRE(t.ok());
      const auto& e = t.root().children.front();
      bool logical = e.kind == java::NodeKind::Binary && (t.text(e.op) == "&&" || t.text(e.op) == "||");
      CHECK_FALSE(logical);
      CHECK(normalize_atom(atom) == atom);
    }
  }
}

TEST_CASE("property: monotonicity, set semantics, determinism, singleton") {
  CondGen g{std::mt19937(7)};
  for (int trial = 0; trial < 100; ++trial) {
    std::set<std::string> leaves;
    std::string cond = g.gen(3, leaves);
    std::string body = "if (" + cond + ") { go(); }\nwhile (i < n) { i++; }";
    std::size_t base = extract_atoms(wrap(body)).count;

    std::string fresh = "fresh" + std::to_string(trial) + "()";
    CHECK(extract_atoms(wrap(body + "\nif (" + fresh + ") { stop(); }")).count == base + 1);
    CHECK(extract_atoms(wrap(body + "\nint z = (" + cond + ") ? 1 : 2;")).count == base);

    CodeSnippet s = wrap(body);
    CHECK(nlohmann::json(corpus_metrics({s})).dump() == nlohmann::json(corpus_metrics({s})).dump());
    CHECK(corpus_metrics({s}).avg_abe == static_cast<double>(base));
  }
}
