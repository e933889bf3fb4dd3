#include "robgen/java/syntax.hpp"

#include <utility>

namespace robgen::java {

std::string_view to_string(NodeKind kind) noexcept {
  switch (kind) {
    case NodeKind::Root: return "Root";
    case NodeKind::ClassDecl: return "ClassDecl";
    case NodeKind::MethodDecl: return "MethodDecl";
    case NodeKind::FieldDecl: return "FieldDecl";
    case NodeKind::Initializer: return "Initializer";
    case NodeKind::Parameter: return "Parameter";
    case NodeKind::Annotation: return "Annotation";
    case NodeKind::Type: return "Type";
    case NodeKind::Block: return "Block";
    case NodeKind::LocalVarDecl: return "LocalVarDecl";
    case NodeKind::VarDeclarator: return "VarDeclarator";
    case NodeKind::If: return "If";
    case NodeKind::While: return "While";
    case NodeKind::DoWhile: return "DoWhile";
    case NodeKind::For: return "For";
    case NodeKind::ForInit: return "ForInit";
    case NodeKind::ForUpdate: return "ForUpdate";
    case NodeKind::ForEach: return "ForEach";
    case NodeKind::Switch: return "Switch";
    case NodeKind::SwitchCase: return "SwitchCase";
    case NodeKind::Try: return "Try";
    case NodeKind::Resource: return "Resource";
    case NodeKind::Catch: return "Catch";
    case NodeKind::Finally: return "Finally";
    case NodeKind::Return: return "Return";
    case NodeKind::Throw: return "Throw";
    case NodeKind::Break: return "Break";
    case NodeKind::Continue: return "Continue";
    case NodeKind::Yield: return "Yield";
    case NodeKind::Assert: return "Assert";
    case NodeKind::Synchronized: return "Synchronized";
    case NodeKind::Labeled: return "Labeled";
    case NodeKind::ExpressionStmt: return "ExpressionStmt";
    case NodeKind::Empty: return "Empty";
    case NodeKind::LocalClass: return "LocalClass";
    case NodeKind::Binary: return "Binary";
    case NodeKind::Unary: return "Unary";
    case NodeKind::Postfix: return "Postfix";
    case NodeKind::Assign: return "Assign";
    case NodeKind::Conditional: return "Conditional";
    case NodeKind::Cast: return "Cast";
    case NodeKind::InstanceOf: return "InstanceOf";
    case NodeKind::Call: return "Call";
    case NodeKind::FieldAccess: return "FieldAccess";
    case NodeKind::ArrayAccess: return "ArrayAccess";
    case NodeKind::Literal: return "Literal";
    case NodeKind::Name: return "Name";
    case NodeKind::Paren: return "Paren";
    case NodeKind::New: return "New";
    case NodeKind::NewArray: return "NewArray";
    case NodeKind::ArrayInit: return "ArrayInit";
    case NodeKind::Lambda: return "Lambda";
    case NodeKind::MethodRef: return "MethodRef";
    case NodeKind::ClassLiteral: return "ClassLiteral";
    case NodeKind::This: return "This";
    case NodeKind::Super: return "Super";
    case NodeKind::SwitchExpr: return "SwitchExpr";
    case NodeKind::Error: return "Error";
  }
  return "?";
}

bool is_statement(NodeKind kind) noexcept {
  switch (kind) {
    case NodeKind::Block:
    case NodeKind::LocalVarDecl:
    case NodeKind::If:
    case NodeKind::While:
    case NodeKind::DoWhile:
    case NodeKind::For:
    case NodeKind::ForEach:
    case NodeKind::Switch:
    case NodeKind::Try:
    case NodeKind::Return:
    case NodeKind::Throw:
    case NodeKind::Break:
    case NodeKind::Continue:
    case NodeKind::Yield:
    case NodeKind::Assert:
    case NodeKind::Synchronized:
    case NodeKind::Labeled:
    case NodeKind::ExpressionStmt:
    case NodeKind::Empty:
    case NodeKind::LocalClass:
      return true;
    default:
      return false;
  }
}

bool is_expression(NodeKind kind) noexcept {
  return kind >= NodeKind::Binary && kind <= NodeKind::SwitchExpr;
}

SyntaxTree::SyntaxTree(std::string source, LexResult lexed, std::vector<TokenRole> roles,
                       Node root, std::vector<ParseError> errors)
    : source_(std::move(source)),
      tokens_(std::move(lexed.tokens)),
      comments_(std::move(lexed.comments)),
      roles_(std::move(roles)),
      root_(std::move(root)),
      errors_(std::move(errors)),
      line_count_(lexed.line_count) {}

std::string_view SyntaxTree::text(std::uint32_t token) const {
  if (token >= tokens_.size()) return {};
  const Token& t = tokens_[token];
  return std::string_view(source_).substr(t.offset, t.length);
}

std::string_view SyntaxTree::text(const Node& node) const {
  if (node.first >= node.last || node.first >= tokens_.size()) return {};
  std::uint32_t begin = tokens_[node.first].offset;
  std::uint32_t end = tokens_[node.last - 1].end();
  return std::string_view(source_).substr(begin, end - begin);
}

std::uint32_t SyntaxTree::line(const Node& node) const {
  if (tokens_.empty()) return 1;
  std::uint32_t i = node.first < tokens_.size() ? node.first : tokens_.size() - 1;
  return tokens_[i].line;
}

std::uint32_t SyntaxTree::end_line(const Node& node) const {
  if (node.last == 0 || node.last <= node.first) return line(node);
  std::uint32_t i = node.last - 1 < tokens_.size() ? node.last - 1 : tokens_.size() - 1;
  return tokens_[i].end_line;
}

namespace {

bool one_of(std::string_view t, std::initializer_list<std::string_view> set) {
  for (auto s : set) {
    if (t == s) return true;
  }
  return false;
}

}  // namespace

std::string SyntaxTree::render(std::uint32_t first, std::uint32_t last) const {
  std::string out;
  if (last > tokens_.size()) last = static_cast<std::uint32_t>(tokens_.size());
  for (std::uint32_t i = first; i < last; ++i) {
    const Token& b = tokens_[i];
    if (b.kind == TokenKind::Eof) break;
    std::string_view bt = text(i);
    if (i > first) {
      const Token& a = tokens_[i - 1];
      std::string_view at = text(i - 1);
      TokenRole ar = roles_[i - 1];
      TokenRole br = roles_[i];
      bool space;
      bool a_op = a.kind == TokenKind::Operator;
      bool b_op = b.kind == TokenKind::Operator;
      if (br == TokenRole::SpacedCont) {
        space = false;
      } else if (ar == TokenRole::Unary || br == TokenRole::Postfix) {
        space = false;
      } else if (ar == TokenRole::Spaced || ar == TokenRole::SpacedCont ||
                 br == TokenRole::Spaced) {
        space = true;
      } else if (ar == TokenRole::CastClose) {
        space = true;
      } else if (b_op && one_of(bt, {")", "]", ";", ",", ".", "::", "..."})) {
        space = false;
      } else if (a_op && one_of(at, {"(", "[", ".", "::", "@"})) {
        space = false;
      } else if (a_op && at == ",") {
        space = true;
      } else if (br == TokenRole::Generic) {
        space = false;
      } else if (ar == TokenRole::Generic) {
        space = at == ">" && is_wordlike(b.kind);
      } else if (b_op && (bt == "(" || bt == "[")) {
        space = false;
      } else if (b_op && bt == "{") {
        space = true;
      } else if (a_op && at == "{") {
        space = false;
      } else if (b_op && bt == "}") {
        space = false;
      } else if (is_wordlike(a.kind) && is_wordlike(b.kind)) {
        space = true;
      } else if (a_op && (at == ")" || at == "]" || at == "}") && is_wordlike(b.kind)) {
        space = true;
      } else {
        space = !(a_op || b_op);
      }
      if (space) out.push_back(' ');
    }
    out.append(bt);
  }
  return out;
}

void walk(const Node& node, const std::function<bool(const Node&)>& visit) {
  if (!visit(node)) return;
  for (const Node& child : node.children) walk(child, visit);
}

std::size_t count_kind(const Node& node, NodeKind kind) {
  std::size_t n = 0;
  walk(node, [&](const Node& x) {
    if (x.kind == kind) ++n;
    return true;
  });
  return n;
}

}  // namespace robgen::java
