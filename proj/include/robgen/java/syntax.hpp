#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "robgen/java/lexer.hpp"

namespace robgen::java {

enum class NodeKind : std::uint8_t {
  // containers
  Root,
  ClassDecl,  // class, interface, enum, record, @interface
  MethodDecl,  // methods and constructors
  FieldDecl,
  Initializer,
  Parameter,
  Annotation,
  Type,
  // statements
  Block,
  LocalVarDecl,
  VarDeclarator,
  If,
  While,
  DoWhile,
  For,
  ForInit,
  ForUpdate,
  ForEach,
  Switch,
  SwitchCase,
  Try,
  Resource,
  Catch,
  Finally,
  Return,
  Throw,
  Break,
  Continue,
  Yield,
  Assert,
  Synchronized,
  Labeled,
  ExpressionStmt,
  Empty,
  LocalClass,
  // expressions
  Binary,
  Unary,
  Postfix,
  Assign,
  Conditional,
  Cast,
  InstanceOf,
  Call,
  FieldAccess,
  ArrayAccess,
  Literal,
  Name,
  Paren,
  New,
  NewArray,
  ArrayInit,
  Lambda,
  MethodRef,
  ClassLiteral,
  This,
  Super,
  SwitchExpr,
  // error recovery
  Error,
};

std::string_view to_string(NodeKind kind) noexcept;
bool is_statement(NodeKind kind) noexcept;
bool is_expression(NodeKind kind) noexcept;

inline constexpr std::uint32_t kNoToken = 0xffffffffu;

// One node of the concrete syntax tree. Nodes cover a contiguous token range
// [first, last); children are owned by value.
//
// Child layouts for the kinds that consumers inspect:
//   If            cond, then, [else]
//   While         cond, body
//   DoWhile       body, cond
//   For           ForInit, cond (Empty when absent), ForUpdate, body
//   ForEach       Parameter, iterable, body
//   Conditional   cond, when_true, when_false
//   Binary        lhs, rhs (op = operator token)
//   Unary         operand (op = operator token)
//   InstanceOf    expr, Type   (name = pattern binding, if any)
//   Call          [receiver] args... (name = method name, kHasReceiver)
//   FieldAccess   receiver (name = member)
//   MethodDecl    Type?, Parameter..., [Block]  (name = method name)
//   Parameter     Type (name = parameter name)
//   VarDeclarator [initializer] (name = variable name)
//   Lambda        Parameter..., body
//   Try           Resource..., Block, Catch..., [Finally]
//   Catch         Parameter, Block
//   Assert        cond, [message]
struct Node {
  NodeKind kind = NodeKind::Error;
  std::uint32_t first = 0;
  std::uint32_t last = 0;
  std::uint32_t op = kNoToken;
  std::uint32_t name = kNoToken;
  std::uint8_t flags = 0;
  std::vector<Node> children;

  static constexpr std::uint8_t kHasReceiver = 1;
  static constexpr std::uint8_t kHasCond = 2;
  static constexpr std::uint8_t kVarargs = 4;
  static constexpr std::uint8_t kHasBody = 8;
  static constexpr std::uint8_t kConstructor = 16;

  bool has(std::uint8_t flag) const { return (flags & flag) != 0; }
};

// How a token renders in canonical form; assigned by the parser.
enum class TokenRole : std::uint8_t {
  Plain,
  Spaced,      // binary/assignment operators, ternary ?:, lambda arrow
  SpacedCont,  // continuation of a glued operator such as '>' '>' '='
  Unary,       // prefix operators
  Postfix,
  Generic,     // angle brackets of type arguments
  CastClose,   // ')' closing a cast
};

struct ParseError {
  std::uint32_t line = 1;
  std::uint32_t column = 1;
  std::string message;
};

// A parsed source text. Owns the source so that token views stay valid.
class SyntaxTree {
 public:
  SyntaxTree() = default;
  SyntaxTree(std::string source, LexResult lexed, std::vector<TokenRole> roles, Node root,
             std::vector<ParseError> errors);

  const std::string& source() const { return source_; }
  const std::vector<Token>& tokens() const { return tokens_; }
  const std::vector<Comment>& comments() const { return comments_; }
  const std::vector<TokenRole>& roles() const { return roles_; }
  const Node& root() const { return root_; }
  const std::vector<ParseError>& errors() const { return errors_; }
  std::uint32_t line_count() const { return line_count_; }
  bool ok() const { return errors_.empty(); }

  std::string_view text(std::uint32_t token) const;
  std::string_view text(const Node& node) const;  // verbatim source slice
  std::uint32_t line(const Node& node) const;
  std::uint32_t end_line(const Node& node) const;

  // Canonical single-line rendering of a token range: comments dropped and
  // whitespace chosen by token role, so equal code renders equal.
  std::string render(std::uint32_t first, std::uint32_t last) const;
  std::string render(const Node& node) const { return render(node.first, node.last); }

 private:
  std::string source_;
  std::vector<Token> tokens_;
  std::vector<Comment> comments_;
  std::vector<TokenRole> roles_;
  Node root_;
  std::vector<ParseError> errors_;
  std::uint32_t line_count_ = 1;
};

// Pre-order walk; return false from the visitor to skip a node's children.
void walk(const Node& node, const std::function<bool(const Node&)>& visit);

std::size_t count_kind(const Node& node, NodeKind kind);

}  // namespace robgen::java
