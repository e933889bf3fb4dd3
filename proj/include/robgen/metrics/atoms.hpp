#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "robgen/java/syntax.hpp"
#include "robgen/snippet.hpp"

namespace robgen::metrics {

// Parses a method snippet. Throws EmptySource for blank input and
// NoMethodFound when no method declaration exists; syntax errors are kept
// in the returned tree.
java::SyntaxTree parse_snippet(std::string source);

enum class Construct { If, While, DoWhile, For, Ternary, Assert, Try };

std::string_view to_string(Construct c) noexcept;

// One leaf of a decomposed control condition, before set collapse.
struct AtomOccurrence {
  std::string text;               // normalized
  const java::Node* node = nullptr;  // leaf expression inside the tree
  std::uint32_t line = 1;         // source line of the leaf
  Construct construct = Construct::If;
};

struct AtomHarvest {
  std::vector<AtomOccurrence> atoms;  // source order
  std::size_t skipped_conditions = 0;  // conditions inside unparseable regions
};

// Conditions of if/while/do-while/for (middle clause) and ternaries, each
// split at top-level && and || with parentheses and ! peeled off.
AtomHarvest harvest_atoms(const java::SyntaxTree& tree);

// Splits one condition expression into its leaves.
void decompose_condition(const java::SyntaxTree& tree, const java::Node& condition,
                         std::vector<const java::Node*>& leaves);

// Canonical text of an expression: whitespace chosen by token role, outer
// parentheses and outer '!' stripped. Idempotent.
std::string normalize_atom(std::string_view expression);

struct AtomSet {
  std::string snippet_id;
  std::set<std::string> atoms;
  std::size_t count = 0;
  std::size_t skipped_conditions = 0;
};

AtomSet extract_atoms(const CodeSnippet& snippet);
AtomSet extract_atoms(const java::SyntaxTree& tree, std::string snippet_id);

struct ExceptionHandlingOptions {
  bool strict_catch = false;  // only try statements with at least one catch
};

bool has_exception_handling(const CodeSnippet& snippet, ExceptionHandlingOptions options = {});
bool has_exception_handling(const java::SyntaxTree& tree, ExceptionHandlingOptions options = {});

}  // namespace robgen::metrics
