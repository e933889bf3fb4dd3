#include "robgen/metrics/atoms.hpp"

#include <cctype>

#include "robgen/error.hpp"
#include "robgen/java/parser.hpp"

namespace robgen::metrics {

using java::Node;
using java::NodeKind;
using java::SyntaxTree;

namespace {

bool blank(std::string_view s) {
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  return true;
}

bool contains_error(const Node& n) {
  bool found = false;
  java::walk(n, [&](const Node& c) {
    if (c.kind == NodeKind::Error) found = true;
    return !found;
  });
  return found;
}

// Peels parentheses and a leading '!' until neither applies.
const Node* peel(const SyntaxTree& tree, const Node* n) {
  for (;;) {
    if (n->kind == NodeKind::Paren && !n->children.empty()) {
      n = &n->children.front();
    } else if (n->kind == NodeKind::Unary && !n->children.empty() && n->op != java::kNoToken &&
               tree.text(n->op) == "!") {
      n = &n->children.front();
    } else {
      return n;
    }
  }
}

std::string collapse_ws(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string_view to_string(Construct c) noexcept {
  switch (c) {
    case Construct::If: return "if";
    case Construct::While: return "while";
    case Construct::DoWhile: return "do_while";
    case Construct::For: return "for";
    case Construct::Ternary: return "ternary";
    case Construct::Assert: return "assert";
    case Construct::Try: return "try";
  }
  return "if";
}

SyntaxTree parse_snippet(std::string source) {
  if (blank(source)) throw Error(ErrorKind::EmptySource, "source is blank");
  SyntaxTree tree = java::parse_source(std::move(source));
  if (java::count_kind(tree.root(), NodeKind::MethodDecl) == 0)
    throw Error(ErrorKind::NoMethodFound, "no method declaration in source");
  return tree;
}

void decompose_condition(const SyntaxTree& tree, const Node& condition,
                         std::vector<const Node*>& leaves) {
  const Node* n = peel(tree, &condition);
  if (n->kind == NodeKind::Binary && n->children.size() == 2 && n->op != java::kNoToken) {
    auto op = tree.text(n->op);
    if (op == "&&" || op == "||") {
      decompose_condition(tree, n->children[0], leaves);
      decompose_condition(tree, n->children[1], leaves);
      return;
    }
  }
  leaves.push_back(n);
}

AtomHarvest harvest_atoms(const SyntaxTree& tree) {
  AtomHarvest out;
  auto take = [&](const Node& cond, Construct construct) {
    if (cond.kind == NodeKind::Empty) return;
    if (contains_error(cond)) {
      ++out.skipped_conditions;
      return;
    }
    std::vector<const Node*> leaves;
    decompose_condition(tree, cond, leaves);
    for (const Node* leaf : leaves)
      out.atoms.push_back({tree.render(*leaf), leaf, tree.line(*leaf), construct});
  };
  java::walk(tree.root(), [&](const Node& n) {
    switch (n.kind) {
      case NodeKind::If:
        if (!n.children.empty()) take(n.children[0], Construct::If);
        break;
      case NodeKind::While:
        if (!n.children.empty()) take(n.children[0], Construct::While);
        break;
      case NodeKind::DoWhile:
        if (n.children.size() >= 2) take(n.children[1], Construct::DoWhile);
        break;
      case NodeKind::For:
        if (n.children.size() >= 2) take(n.children[1], Construct::For);
        break;
      case NodeKind::Conditional:
        if (!n.children.empty()) take(n.children[0], Construct::Ternary);
        break;
      default:
        break;
    }
    return true;
  });
  return out;
}

std::string normalize_atom(std::string_view expression) {
  SyntaxTree tree = java::parse_expression(std::string(expression));
  if (tree.ok() && !tree.root().children.empty()) {
    const Node* n = peel(tree, &tree.root().children.front());
    return tree.render(*n);
  }
  return collapse_ws(expression);
}

AtomSet extract_atoms(const SyntaxTree& tree, std::string snippet_id) {
  AtomHarvest h = harvest_atoms(tree);
  AtomSet set;
  set.snippet_id = std::move(snippet_id);
  for (auto& a : h.atoms) set.atoms.insert(std::move(a.text));
  set.count = set.atoms.size();
  set.skipped_conditions = h.skipped_conditions;
  return set;
}

AtomSet extract_atoms(const CodeSnippet& snippet) {
  return extract_atoms(parse_snippet(snippet.source), snippet.id);
}

bool has_exception_handling(const SyntaxTree& tree, ExceptionHandlingOptions options) {
  bool found = false;
  java::walk(tree.root(), [&](const Node& n) {
    if (found) return false;
    if (n.kind == NodeKind::Try) {
      if (!options.strict_catch) {
        found = true;
      } else {
        for (const auto& c : n.children)
          if (c.kind == NodeKind::Catch) found = true;
      }
    }
    return true;
  });
  return found;
}

bool has_exception_handling(const CodeSnippet& snippet, ExceptionHandlingOptions options) {
  return has_exception_handling(parse_snippet(snippet.source), options);
}

}  // namespace robgen::metrics
