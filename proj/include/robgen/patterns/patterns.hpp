#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "robgen/java/syntax.hpp"
#include "robgen/snippet.hpp"

namespace robgen::patterns {

enum class GuardKind {
  NullCheck,
  SpecificValueCheck,
  RangeCheck,
  BooleanValueCheck,
  TypeCheck,
  Assertion,
  ErrorHandling,
};

enum class GuardConstruct { If, While, For, Ternary, Assert, Try };

enum class Pattern {
  MissingNullCheck,
  MissingSpecificValueCheck,
  MissingRangeCheck,
  MissingBooleanValueCheck,
  MissingTypeCheck,
  MissingAssertion,
  MissingErrorHandling,
  ErroneousExpression,
  InconsistentExpression,
};

inline constexpr std::size_t kPatternCount = 9;

std::string_view to_string(GuardKind k) noexcept;
std::string_view to_string(GuardConstruct c) noexcept;
std::string_view to_string(Pattern p) noexcept;
GuardKind guard_kind_from_string(std::string_view s);
GuardConstruct guard_construct_from_string(std::string_view s);
Pattern pattern_from_string(std::string_view s);
Pattern missing_pattern(GuardKind k) noexcept;
bool is_missing(Pattern p) noexcept;

struct Guard {
  GuardKind kind = GuardKind::BooleanValueCheck;
  std::string expression;  // normalized; empty for error_handling
  std::uint32_t line = 1;  // counted from the first line of the method body
  GuardConstruct enclosing_construct = GuardConstruct::If;

  // token index of the enclosing statement in the tree the guard came from;
  // not serialized, only meaningful next to that tree
  std::uint32_t statement_token = java::kNoToken;

  friend bool operator==(const Guard& a, const Guard& b) {
    return a.kind == b.kind && a.expression == b.expression && a.line == b.line &&
           a.enclosing_construct == b.enclosing_construct;
  }
};

struct Finding {
  Pattern pattern = Pattern::MissingNullCheck;
  std::uint32_t line = 1;  // in the generated snippet
  std::optional<Guard> reference_guard;
  std::string detail;

  friend bool operator==(const Finding& a, const Finding& b) {
    return a.pattern == b.pattern && a.line == b.line && a.reference_guard == b.reference_guard &&
           a.detail == b.detail;
  }
};

struct IssueReport {
  std::string snippet_id;
  std::vector<Finding> findings;
  std::optional<std::uint32_t> first_occurrence_line;

  friend bool operator==(const IssueReport& a, const IssueReport& b) {
    return a.snippet_id == b.snippet_id && a.findings == b.findings &&
           a.first_occurrence_line == b.first_occurrence_line;
  }
};

void to_json(nlohmann::json& j, const Guard& g);
void from_json(const nlohmann::json& j, Guard& g);
void to_json(nlohmann::json& j, const Finding& f);
void from_json(const nlohmann::json& j, Finding& f);
void to_json(nlohmann::json& j, const IssueReport& r);
void from_json(const nlohmann::json& j, IssueReport& r);

// Line of the method body's opening brace; guard and finding lines are
// relative to it. 0 when the tree has no method body.
std::uint32_t body_open_line(const java::SyntaxTree& tree);

// Classification of one condition leaf, first match wins.
GuardKind classify_expression(std::string_view expression);

// Parses and rejects sources with syntax errors (Format).
java::SyntaxTree parse_checked(const CodeSnippet& snippet);

std::vector<Guard> extract_guards(const CodeSnippet& snippet);
std::vector<Guard> extract_guards(const java::SyntaxTree& tree);

// Canonical forms used by matching. Identifiers become $0, $1... in order of
// first use (type names stay), and a comparison at the root is folded with
// its negation (== with !=, < with >=, > with <=). The loose form also
// wildcards literals and folds all relational operators together.
struct Canonical {
  std::string exact;
  std::string loose;
  std::vector<std::string> bindings;  // identifier behind each placeholder
};

Canonical canonicalize(std::string_view expression);

struct GuardPair {
  std::size_t gen = 0;
  std::size_t ref = 0;
  int pass = 1;  // 1 identical text, 2 canonical, 3 loose
};

struct Matching {
  std::vector<GuardPair> pairs;
  std::vector<std::size_t> unmatched_ref;
  std::vector<std::size_t> unmatched_gen;
};

Matching match_guards(const std::vector<Guard>& gen, const std::vector<Guard>& ref);

struct DiffOptions {
  bool strict_scope = false;  // empty scope table is an error instead of disabling the check
};

IssueReport diff_findings(const CodeSnippet& generated, const CodeSnippet& reference,
                          const std::set<std::string>& scope_symbols, DiffOptions options = {});
IssueReport diff_findings(const java::SyntaxTree& generated, const java::SyntaxTree& reference,
                          const std::set<std::string>& scope_symbols, std::string snippet_id,
                          DiffOptions options = {});

// Line in the generated snippet for a reference guard that has no match.
std::uint32_t localize(const java::SyntaxTree& generated, const java::SyntaxTree& reference,
                       const Guard& reference_guard);

std::map<std::uint32_t, double> line_distribution(const std::vector<IssueReport>& reports);

struct PatternPair {
  std::string id;
  std::string generated;
  std::string reference;
  std::set<std::string> scope_symbols;
};

std::vector<PatternPair> load_pairs(const std::string& path);

}  // namespace robgen::patterns
