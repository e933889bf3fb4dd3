#include "robgen/java/parser.hpp"

#include <cctype>
#include <string>
#include <utility>

namespace robgen::java {
namespace {

constexpr std::size_t kNpos = static_cast<std::size_t>(-1);
constexpr int kMaxDepth = 256;

bool is_modifier(std::string_view w) {
  return w == "public" || w == "protected" || w == "private" || w == "static" || w == "final" ||
         w == "abstract" || w == "native" || w == "synchronized" || w == "transient" ||
         w == "volatile" || w == "strictfp" || w == "default";
}

bool is_assign_op(std::string_view w) {
  return w == "=" || w == "+=" || w == "-=" || w == "*=" || w == "/=" || w == "&=" || w == "|=" ||
         w == "^=" || w == "%=" || w == "<<=";
}

struct BinaryOp {
  int precedence = 0;  // 0 = not a binary operator
  std::size_t width = 1;
  bool instance_of = false;
};

class Parser {
 public:
  Parser(std::string_view source, const LexResult& lexed, std::vector<TokenRole>& roles,
         std::vector<ParseError>& errors)
      : src_(source), toks_(lexed.tokens), roles_(roles), errors_(errors) {}

  Node compilation_unit() {
    Node root = open(NodeKind::Root);
    while (!at_eof()) {
      std::size_t before = pos_;
      if (is_op("}")) {
        error_here("unexpected '}'");
        ++pos_;
        continue;
      }
      root.children.push_back(member(true));
      if (pos_ == before) skip_one_as_error(root);
    }
    return close(std::move(root));
  }

  Node statement_list() {
    Node root = open(NodeKind::Root);
    while (!at_eof()) {
      std::size_t before = pos_;
      if (is_op("}")) {
        error_here("unexpected '}'");
        ++pos_;
        continue;
      }
      root.children.push_back(block_statement());
      if (pos_ == before) skip_one_as_error(root);
    }
    return close(std::move(root));
  }

  Node single_expression() {
    Node root = open(NodeKind::Root);
    root.children.push_back(expression());
    if (!at_eof()) {
      error_here("unexpected trailing tokens");
      Node err = open(NodeKind::Error);
      while (!at_eof()) ++pos_;
      root.children.push_back(close(std::move(err)));
    }
    return close(std::move(root));
  }

 private:
  // ---- token helpers -------------------------------------------------------

  const Token& tok(std::size_t i) const { return toks_[i < toks_.size() ? i : toks_.size() - 1]; }
  std::string_view text(std::size_t i) const {
    const Token& t = tok(i);
    return src_.substr(t.offset, t.length);
  }
  TokenKind kind(std::size_t i) const { return tok(i).kind; }
  bool at_eof() const { return kind(pos_) == TokenKind::Eof; }
  bool is_op_at(std::size_t i, std::string_view op) const {
    return kind(i) == TokenKind::Operator && text(i) == op;
  }
  bool is_op(std::string_view op) const { return is_op_at(pos_, op); }
  bool is_kw_at(std::size_t i, std::string_view kw) const {
    return kind(i) == TokenKind::Keyword && text(i) == kw;
  }
  bool is_kw(std::string_view kw) const { return is_kw_at(pos_, kw); }
  bool is_ident_at(std::size_t i) const { return kind(i) == TokenKind::Identifier; }
  bool is_word_at(std::size_t i, std::string_view w) const {
    return kind(i) == TokenKind::Identifier && text(i) == w;
  }
  bool glued(std::size_t i) const { return tok(i).end() == tok(i + 1).offset; }

  void role(std::size_t i, TokenRole r) {
    if (i < roles_.size()) roles_[i] = r;
  }

  void error_at(std::size_t i, std::string message) {
    const Token& t = tok(i);
    if (!errors_.empty() && last_error_token_ == i) return;
    last_error_token_ = i;
    errors_.push_back({t.line, t.column, std::move(message)});
  }
  void error_here(std::string message) { error_at(pos_, std::move(message)); }

  bool accept_op(std::string_view op) {
    if (!is_op(op)) return false;
    ++pos_;
    return true;
  }

  bool expect_op(std::string_view op) {
    if (accept_op(op)) return true;
    error_here("expected '" + std::string(op) + "'");
    return false;
  }

  Node open(NodeKind k) const {
    Node n;
    n.kind = k;
    n.first = n.last = static_cast<std::uint32_t>(pos_);
    return n;
  }

  Node close(Node n) const {
    n.last = static_cast<std::uint32_t>(pos_);
    if (n.last < n.first) n.last = n.first;
    return n;
  }

  void skip_one_as_error(Node& parent) {
    Node err = open(NodeKind::Error);
    error_here("unexpected token '" + std::string(text(pos_)) + "'");
    ++pos_;
    parent.children.push_back(close(std::move(err)));
  }

  // ---- speculative scanning (no roles, no errors) --------------------------

  std::size_t skip_balanced(std::size_t p) const {
    // p is at an opening bracket; returns the index after its partner.
    int depth = 0;
    for (; kind(p) != TokenKind::Eof; ++p) {
      if (kind(p) != TokenKind::Operator) continue;
      std::string_view t = text(p);
      if (t == "(" || t == "[" || t == "{") {
        ++depth;
      } else if (t == ")" || t == "]" || t == "}") {
        if (--depth == 0) return p + 1;
      }
    }
    return kNpos;
  }

  std::size_t scan_annotation(std::size_t p) const {
    if (!is_op_at(p, "@") || is_kw_at(p + 1, "interface")) return kNpos;
    ++p;
    if (!is_ident_at(p)) return kNpos;
    ++p;
    while (is_op_at(p, ".") && is_ident_at(p + 1)) p += 2;
    if (is_op_at(p, "(")) p = skip_balanced(p);
    return p;
  }

  std::size_t skip_annotations(std::size_t p) const {
    while (is_op_at(p, "@")) {
      std::size_t q = scan_annotation(p);
      if (q == kNpos) return p;
      p = q;
    }
    return p;
  }

  std::size_t scan_type_args(std::size_t p) const {
    if (!is_op_at(p, "<")) return kNpos;
    ++p;
    if (is_op_at(p, ">")) return p + 1;
    while (true) {
      p = skip_annotations(p);
      if (is_op_at(p, "?")) {
        ++p;
        if (is_kw_at(p, "extends") || is_kw_at(p, "super")) {
          p = scan_type(p + 1, false);
          if (p == kNpos) return kNpos;
        }
      } else {
        p = scan_type(p, false);
        if (p == kNpos) return kNpos;
      }
      if (is_op_at(p, ",")) {
        ++p;
        continue;
      }
      if (is_op_at(p, ">")) return p + 1;
      return kNpos;
    }
  }

  std::size_t scan_type(std::size_t p, bool allow_void) const {
    p = skip_annotations(p);
    if (kind(p) == TokenKind::Keyword &&
        (is_primitive_type(text(p)) || (allow_void && text(p) == "void"))) {
      ++p;
    } else if (is_ident_at(p)) {
      ++p;
      while (true) {
        if (is_op_at(p, "<")) {
          p = scan_type_args(p);
          if (p == kNpos) return kNpos;
        }
        if (is_op_at(p, ".") && (is_ident_at(p + 1) || is_op_at(p + 1, "@"))) {
          p = skip_annotations(p + 1);
          if (!is_ident_at(p)) return kNpos;
          ++p;
          continue;
        }
        break;
      }
    } else {
      return kNpos;
    }
    while (true) {
      std::size_t q = skip_annotations(p);
      if (is_op_at(q, "[") && is_op_at(q + 1, "]")) {
        p = q + 2;
      } else {
        break;
      }
    }
    return p;
  }

  std::size_t skip_decl_modifiers(std::size_t p) const {
    while (true) {
      if (is_kw_at(p, "final")) {
        ++p;
      } else if (is_op_at(p, "@") && !is_kw_at(p + 1, "interface")) {
        std::size_t q = scan_annotation(p);
        if (q == kNpos) return p;
        p = q;
      } else {
        return p;
      }
    }
  }

  bool local_var_ahead() const {
    std::size_t p = skip_decl_modifiers(pos_);
    std::size_t q = scan_type(p, false);
    if (q == kNpos || !is_ident_at(q)) return false;
    std::size_t n = q + 1;
    return is_op_at(n, "=") || is_op_at(n, ";") || is_op_at(n, ",") || is_op_at(n, "[") ||
           is_op_at(n, ":") || kind(n) == TokenKind::Eof;
  }

  bool foreach_ahead() const {
    std::size_t p = skip_decl_modifiers(pos_);
    std::size_t q = scan_type(p, false);
    if (q == kNpos || !is_ident_at(q)) return false;
    return is_op_at(q + 1, ":");
  }

  bool type_decl_ahead(std::size_t p) const {
    while (true) {
      if (kind(p) == TokenKind::Keyword && is_modifier(text(p))) {
        ++p;
      } else if (is_word_at(p, "sealed")) {
        ++p;
      } else if (is_word_at(p, "non") && is_op_at(p + 1, "-") && is_word_at(p + 2, "sealed")) {
        p += 3;
      } else if (is_op_at(p, "@") && !is_kw_at(p + 1, "interface")) {
        std::size_t q = scan_annotation(p);
        if (q == kNpos) return false;
        p = q;
      } else {
        break;
      }
    }
    if (is_kw_at(p, "class") || is_kw_at(p, "interface") || is_kw_at(p, "enum")) return true;
    if (is_op_at(p, "@") && is_kw_at(p + 1, "interface")) return true;
    return is_word_at(p, "record") && is_ident_at(p + 1) &&
           (is_op_at(p + 2, "(") || is_op_at(p + 2, "<"));
  }

  bool lambda_ahead() const {
    if ((is_ident_at(pos_) || is_kw_at(pos_, "_")) && is_op_at(pos_ + 1, "->")) return true;
    if (!is_op("(")) return false;
    std::size_t q = skip_balanced(pos_);
    return q != kNpos && is_op_at(q, "->");
  }

  bool cast_ahead() const {
    std::size_t p = pos_ + 1;
    if (kind(p) == TokenKind::Keyword && is_primitive_type(text(p))) {
      std::size_t q = scan_type(p, false);
      return q != kNpos && is_op_at(q, ")");
    }
    std::size_t q = scan_type(p, false);
    if (q == kNpos) return false;
    while (is_op_at(q, "&")) {
      q = scan_type(q + 1, false);
      if (q == kNpos) return false;
    }
    if (!is_op_at(q, ")")) return false;
    std::size_t n = q + 1;
    TokenKind k = kind(n);
    if (k == TokenKind::Identifier || is_literal(k)) return true;
    if (is_op_at(n, "(") || is_op_at(n, "!") || is_op_at(n, "~")) return true;
    return is_kw_at(n, "this") || is_kw_at(n, "super") || is_kw_at(n, "new") ||
           is_kw_at(n, "switch");
  }

  // ---- types ---------------------------------------------------------------

  void annotations(Node& parent) {
    while (is_op("@") && !is_kw_at(pos_ + 1, "interface")) {
      std::size_t q = scan_annotation(pos_);
      if (q == kNpos) {
        error_here("malformed annotation");
        ++pos_;
        continue;
      }
      Node a = open(NodeKind::Annotation);
      a.name = static_cast<std::uint32_t>(pos_ + 1);
      pos_ = q;
      parent.children.push_back(close(std::move(a)));
    }
  }

  void type_args() {
    // Marks a balanced <...> run as generic brackets.
    int depth = 0;
    while (!at_eof()) {
      if (is_op("<")) {
        role(pos_, TokenRole::Generic);
        ++depth;
      } else if (is_op(">")) {
        role(pos_, TokenRole::Generic);
        if (--depth == 0) {
          ++pos_;
          return;
        }
      } else if (is_op("&")) {
        role(pos_, TokenRole::Spaced);
      }
      ++pos_;
    }
    error_here("unterminated type arguments");
  }

  Node type(bool allow_void) {
    Node t = open(NodeKind::Type);
    std::size_t end = scan_type(pos_, allow_void);
    if (end == kNpos) {
      error_here("expected type");
      t.kind = NodeKind::Error;
      return close(std::move(t));
    }
    while (pos_ < end) {
      if (is_op("<")) {
        type_args();
      } else {
        ++pos_;
      }
    }
    return close(std::move(t));
  }

  void type_list(Node& parent) {
    while (true) {
      parent.children.push_back(type(false));
      if (!accept_op(",")) break;
    }
  }

  // ---- declarations --------------------------------------------------------

  void modifiers(Node& parent) {
    while (true) {
      if (kind(pos_) == TokenKind::Keyword && is_modifier(text(pos_))) {
        ++pos_;
      } else if (is_word_at(pos_, "sealed") && !is_op_at(pos_ + 1, "(") &&
                 !is_op_at(pos_ + 1, "=") && !is_op_at(pos_ + 1, ";")) {
        ++pos_;
      } else if (is_word_at(pos_, "non") && is_op_at(pos_ + 1, "-") &&
                 is_word_at(pos_ + 2, "sealed")) {
        pos_ += 3;
      } else if (is_op("@") && !is_kw_at(pos_ + 1, "interface")) {
        annotations(parent);
      } else {
        return;
      }
    }
  }

  Node member(bool top_level) {
    if (++depth_ > kMaxDepth) return too_deep();
    Node result = member_inner(top_level);
    --depth_;
    return result;
  }

  Node too_deep() {
    --depth_;
    error_here("nesting too deep");
    Node err = open(NodeKind::Error);
    if (!at_eof()) ++pos_;
    return close(std::move(err));
  }

  Node member_inner(bool top_level) {
    std::size_t start = pos_;
    if (is_op(";")) {
      Node e = open(NodeKind::Empty);
      ++pos_;
      return close(std::move(e));
    }
    if (top_level && (is_kw("package") || is_kw("import"))) {
      Node e = open(NodeKind::Empty);
      while (!at_eof() && !is_op(";")) ++pos_;
      expect_op(";");
      return close(std::move(e));
    }
    if (type_decl_ahead(pos_)) return type_declaration(NodeKind::ClassDecl);

    Node holder = open(NodeKind::Error);
    modifiers(holder);
    if (is_op("{")) {
      Node init = open(NodeKind::Initializer);
      init.first = static_cast<std::uint32_t>(start);
      init.children.push_back(block());
      return close(std::move(init));
    }
    if (is_op("<")) type_args();

    if (is_ident_at(pos_) && is_op_at(pos_ + 1, "(")) {
      Node m = open(NodeKind::MethodDecl);
      m.first = static_cast<std::uint32_t>(start);
      m.flags |= Node::kConstructor;
      m.children = std::move(holder.children);
      return method_rest(std::move(m));
    }
    if (scan_type(pos_, true) != kNpos) {
      Node t = type(true);
      if (is_ident_at(pos_) && is_op_at(pos_ + 1, "(")) {
        Node m = open(NodeKind::MethodDecl);
        m.first = static_cast<std::uint32_t>(start);
        m.children = std::move(holder.children);
        m.children.push_back(std::move(t));
        return method_rest(std::move(m));
      }
      if (is_ident_at(pos_)) {
        Node f = open(NodeKind::FieldDecl);
        f.first = static_cast<std::uint32_t>(start);
        f.children.push_back(std::move(t));
        declarators(f);
        expect_op(";");
        return close(std::move(f));
      }
    }
    error_here("expected member declaration");
    return recover_member(start);
  }

  Node method_rest(Node m) {
    m.name = static_cast<std::uint32_t>(pos_);
    ++pos_;
    parameters(m);
    while (is_op("[") && is_op_at(pos_ + 1, "]")) pos_ += 2;
    if (is_kw("throws")) {
      ++pos_;
      Node throws_holder = open(NodeKind::Error);
      type_list(throws_holder);
    }
    if (is_op("{")) {
      m.flags |= Node::kHasBody;
      m.children.push_back(block());
    } else if (is_kw("default")) {
      ++pos_;
      m.children.push_back(variable_initializer());
      expect_op(";");
    } else {
      expect_op(";");
    }
    return close(std::move(m));
  }

  void parameters(Node& owner) {
    if (!expect_op("(")) return;
    while (!is_op(")") && !at_eof()) {
      std::size_t before = pos_;
      Node p = open(NodeKind::Parameter);
      modifiers(p);
      p.children.push_back(type(false));
      if (accept_op("...")) p.flags |= Node::kVarargs;
      if (is_ident_at(pos_) || is_kw("this") || is_kw("_")) {
        p.name = static_cast<std::uint32_t>(pos_);
        ++pos_;
      } else {
        error_here("expected parameter name");
      }
      while (is_op("[") && is_op_at(pos_ + 1, "]")) pos_ += 2;
      owner.children.push_back(close(std::move(p)));
      if (!accept_op(",")) break;
      if (pos_ == before) break;
    }
    if (!expect_op(")")) {
      while (!at_eof() && !is_op(")") && !is_op("{") && !is_op(";")) ++pos_;
      accept_op(")");
    }
  }

  void declarators(Node& owner) {
    while (true) {
      Node d = open(NodeKind::VarDeclarator);
      if (is_ident_at(pos_) || is_kw("_")) {
        d.name = static_cast<std::uint32_t>(pos_);
        ++pos_;
      } else {
        error_here("expected variable name");
        owner.children.push_back(close(std::move(d)));
        return;
      }
      while (is_op("[") && is_op_at(pos_ + 1, "]")) pos_ += 2;
      if (is_op("=")) {
        role(pos_, TokenRole::Spaced);
        ++pos_;
        d.children.push_back(variable_initializer());
      }
      owner.children.push_back(close(std::move(d)));
      if (!accept_op(",")) return;
    }
  }

  Node variable_initializer() {
    if (is_op("{")) return array_initializer();
    return expression();
  }

  Node array_initializer() {
    Node a = open(NodeKind::ArrayInit);
    expect_op("{");
    while (!is_op("}") && !at_eof()) {
      std::size_t before = pos_;
      a.children.push_back(variable_initializer());
      if (!accept_op(",")) break;
      if (pos_ == before) break;
    }
    expect_op("}");
    return close(std::move(a));
  }

  Node type_declaration(NodeKind k) {
    Node d = open(k);
    modifiers(d);
    bool is_enum = is_kw("enum");
    bool is_record = is_word_at(pos_, "record");
    if (is_op("@")) ++pos_;  // @interface
    ++pos_;                  // class/interface/enum/record
    if (is_ident_at(pos_)) {
      d.name = static_cast<std::uint32_t>(pos_);
      ++pos_;
    } else {
      error_here("expected type name");
    }
    if (is_op("<")) type_args();
    if (is_record && is_op("(")) parameters(d);
    while (is_kw("extends") || is_kw("implements") || is_word_at(pos_, "permits")) {
      ++pos_;
      Node holder = open(NodeKind::Error);
      type_list(holder);
    }
    if (is_op("{")) {
      class_body(d, is_enum);
    } else {
      error_here("expected class body");
    }
    return close(std::move(d));
  }

  void class_body(Node& owner, bool is_enum) {
    expect_op("{");
    if (is_enum) {
      while (!is_op(";") && !is_op("}") && !at_eof()) {
        std::size_t before = pos_;
        Node holder = open(NodeKind::Error);
        annotations(holder);
        if (is_ident_at(pos_)) ++pos_;
        if (is_op("(")) {
          Node call = open(NodeKind::Call);
          arguments(call);
          owner.children.push_back(close(std::move(call)));
        }
        if (is_op("{")) class_body(owner, false);
        if (!accept_op(",")) break;
        if (pos_ == before) break;
      }
      accept_op(";");
    }
    while (!is_op("}") && !at_eof()) {
      std::size_t before = pos_;
      owner.children.push_back(member(false));
      if (pos_ == before) skip_one_as_error(owner);
    }
    expect_op("}");
  }

  // Member-level resync: the next ';', '}' or the first token of a later line.
  Node recover_member(std::size_t start) {
    Node err = open(NodeKind::Error);
    err.first = static_cast<std::uint32_t>(start);
    std::uint32_t line = tok(start).line;
    if (pos_ == start && !at_eof()) ++pos_;
    while (!at_eof() && tok(pos_).line == line && !is_op("}")) {
      if (is_op(";")) {
        ++pos_;
        break;
      }
      ++pos_;
    }
    return close(std::move(err));
  }

  // Skips to a plausible resynchronisation point and wraps the skipped range.
  Node recover(std::size_t start) {
    Node err = open(NodeKind::Error);
    err.first = static_cast<std::uint32_t>(start);
    while (!at_eof()) {
      if (is_op(";")) {
        ++pos_;
        break;
      }
      if (is_op("}")) break;
      if (is_op("{") || is_op("(") || is_op("[")) {
        std::size_t q = skip_balanced(pos_);
        if (q == kNpos) {
          while (!at_eof()) ++pos_;
          break;
        }
        pos_ = q;
        if (tok(q - 1).kind == TokenKind::Operator && text(q - 1) == "}") break;
        continue;
      }
      ++pos_;
    }
    if (pos_ == start && !at_eof() && !is_op("}")) ++pos_;
    return close(std::move(err));
  }

  // ---- statements ----------------------------------------------------------

  Node block() {
    Node b = open(NodeKind::Block);
    if (!expect_op("{")) return close(std::move(b));
    while (!is_op("}") && !at_eof()) {
      std::size_t before = pos_;
      b.children.push_back(block_statement());
      if (pos_ == before) skip_one_as_error(b);
    }
    expect_op("}");
    return close(std::move(b));
  }

  Node block_statement() {
    if (++depth_ > kMaxDepth) return too_deep();
    Node result = block_statement_inner();
    --depth_;
    return result;
  }

  Node block_statement_inner() {
    if (type_decl_ahead(pos_) && !is_kw("default")) {
      Node c = type_declaration(NodeKind::ClassDecl);
      c.kind = NodeKind::LocalClass;
      return c;
    }
    if (local_var_ahead()) {
      Node d = local_var_decl();
      expect_op(";");
      return close(std::move(d));
    }
    return statement();
  }

  Node local_var_decl() {
    Node d = open(NodeKind::LocalVarDecl);
    modifiers(d);
    d.children.push_back(type(false));
    declarators(d);
    return d;
  }

  Node statement() {
    std::size_t start = pos_;
    if (is_op("{")) return block();
    if (is_op(";")) {
      Node e = open(NodeKind::Empty);
      ++pos_;
      return close(std::move(e));
    }
    if (kind(pos_) == TokenKind::Keyword) {
      std::string_view kw = text(pos_);
      if (kw == "if") return if_statement();
      if (kw == "while") return while_statement();
      if (kw == "do") return do_statement();
      if (kw == "for") return for_statement();
      if (kw == "switch" ) {
        Node s = switch_construct(NodeKind::Switch);
        accept_op(";");
        return s;
      }
      if (kw == "try") return try_statement();
      if (kw == "return") return simple_with_optional_expr(NodeKind::Return);
      if (kw == "throw") return simple_with_optional_expr(NodeKind::Throw);
      if (kw == "break" || kw == "continue") {
        Node n = open(kw == "break" ? NodeKind::Break : NodeKind::Continue);
        ++pos_;
        if (is_ident_at(pos_)) ++pos_;
        expect_op(";");
        return close(std::move(n));
      }
      if (kw == "assert") {
        Node n = open(NodeKind::Assert);
        ++pos_;
        n.children.push_back(expression());
        if (is_op(":")) {
          role(pos_, TokenRole::Spaced);
          ++pos_;
          n.children.push_back(expression());
        }
        expect_op(";");
        return close(std::move(n));
      }
      if (kw == "synchronized") {
        Node n = open(NodeKind::Synchronized);
        ++pos_;
        expect_op("(");
        n.children.push_back(expression());
        expect_op(")");
        n.children.push_back(block());
        return close(std::move(n));
      }
      if (kw == "else" || kw == "case" || kw == "catch" || kw == "finally") {
        error_here("unexpected '" + std::string(kw) + "'");
        ++pos_;
        return recover(start);
      }
    }
    if (is_word_at(pos_, "yield") && !is_op_at(pos_ + 1, "=") && !is_op_at(pos_ + 1, ".") &&
        !is_op_at(pos_ + 1, "(") && !is_op_at(pos_ + 1, "[") && !is_op_at(pos_ + 1, "++") &&
        !is_op_at(pos_ + 1, "--")) {
      return simple_with_optional_expr(NodeKind::Yield);
    }
    if (is_ident_at(pos_) && is_op_at(pos_ + 1, ":")) {
      Node l = open(NodeKind::Labeled);
      l.name = static_cast<std::uint32_t>(pos_);
      pos_ += 2;
      l.children.push_back(statement());
      return close(std::move(l));
    }
    Node s = open(NodeKind::ExpressionStmt);
    Node e = expression();
    bool failed = e.kind == NodeKind::Error;
    s.children.push_back(std::move(e));
    if (failed && pos_ == start) return recover(start);
    if (!expect_op(";")) {
      if (!failed) return close(std::move(s));
      Node r = recover(start);
      return r;
    }
    return close(std::move(s));
  }

  Node simple_with_optional_expr(NodeKind k) {
    Node n = open(k);
    ++pos_;
    if (!is_op(";")) n.children.push_back(expression());
    expect_op(";");
    return close(std::move(n));
  }

  Node parenthesized_condition() {
    if (!expect_op("(")) {
      Node err = open(NodeKind::Error);
      return close(std::move(err));
    }
    Node e = expression();
    if (!expect_op(")")) {
      // Make the unparseable condition visible to consumers.
      Node err = open(NodeKind::Error);
      err.first = e.first;
      err.children.push_back(std::move(e));
      return close(std::move(err));
    }
    return e;
  }

  Node if_statement() {
    Node n = open(NodeKind::If);
    ++pos_;
    n.children.push_back(parenthesized_condition());
    n.children.push_back(statement_or_missing());
    if (is_kw("else")) {
      ++pos_;
      n.children.push_back(statement_or_missing());
    }
    return close(std::move(n));
  }

  Node statement_or_missing() {
    if (at_eof()) {
      error_here("expected statement");
      Node err = open(NodeKind::Error);
      return close(std::move(err));
    }
    return block_statement();
  }

  Node while_statement() {
    Node n = open(NodeKind::While);
    ++pos_;
    n.children.push_back(parenthesized_condition());
    n.children.push_back(statement_or_missing());
    return close(std::move(n));
  }

  Node do_statement() {
    Node n = open(NodeKind::DoWhile);
    ++pos_;
    n.children.push_back(statement_or_missing());
    if (is_kw("while")) {
      ++pos_;
      n.children.push_back(parenthesized_condition());
    } else {
      error_here("expected 'while'");
      Node err = open(NodeKind::Error);
      n.children.push_back(close(std::move(err)));
    }
    expect_op(";");
    return close(std::move(n));
  }

  Node for_statement() {
    Node n = open(NodeKind::For);
    ++pos_;
    expect_op("(");
    if (foreach_ahead()) {
      n.kind = NodeKind::ForEach;
      Node p = open(NodeKind::Parameter);
      modifiers(p);
      p.children.push_back(type(false));
      p.name = static_cast<std::uint32_t>(pos_);
      ++pos_;
      n.children.push_back(close(std::move(p)));
      role(pos_, TokenRole::Spaced);
      expect_op(":");
      n.children.push_back(expression());
      expect_op(")");
      n.children.push_back(statement_or_missing());
      return close(std::move(n));
    }
    Node init = open(NodeKind::ForInit);
    if (!is_op(";")) {
      if (local_var_ahead()) {
        init.children.push_back(close(local_var_decl()));
      } else {
        expression_list(init);
      }
    }
    n.children.push_back(close(std::move(init)));
    expect_op(";");
    if (is_op(";")) {
      Node empty = open(NodeKind::Empty);
      n.children.push_back(close(std::move(empty)));
    } else {
      n.children.push_back(expression());
    }
    expect_op(";");
    Node update = open(NodeKind::ForUpdate);
    if (!is_op(")")) expression_list(update);
    n.children.push_back(close(std::move(update)));
    if (!expect_op(")")) {
      n.children.push_back(recover(pos_));
      return close(std::move(n));
    }
    n.children.push_back(statement_or_missing());
    return close(std::move(n));
  }

  void expression_list(Node& owner) {
    while (true) {
      std::size_t before = pos_;
      owner.children.push_back(expression());
      if (!accept_op(",") || pos_ == before) return;
    }
  }

  Node try_statement() {
    Node n = open(NodeKind::Try);
    ++pos_;
    if (accept_op("(")) {
      while (!is_op(")") && !at_eof()) {
        std::size_t before = pos_;
        Node r = open(NodeKind::Resource);
        if (local_var_ahead()) {
          r.children.push_back(close(local_var_decl()));
        } else {
          r.children.push_back(expression());
        }
        n.children.push_back(close(std::move(r)));
        if (!accept_op(";") || pos_ == before) break;
      }
      expect_op(")");
    }
    n.children.push_back(block());
    while (is_kw("catch")) {
      Node c = open(NodeKind::Catch);
      ++pos_;
      expect_op("(");
      Node p = open(NodeKind::Parameter);
      modifiers(p);
      p.children.push_back(type(false));
      while (is_op("|")) {
        role(pos_, TokenRole::Spaced);
        ++pos_;
        p.children.push_back(type(false));
      }
      if (is_ident_at(pos_) || is_kw("_")) {
        p.name = static_cast<std::uint32_t>(pos_);
        ++pos_;
      } else {
        error_here("expected catch parameter name");
      }
      c.children.push_back(close(std::move(p)));
      expect_op(")");
      c.children.push_back(block());
      n.children.push_back(close(std::move(c)));
    }
    if (is_kw("finally")) {
      Node f = open(NodeKind::Finally);
      ++pos_;
      f.children.push_back(block());
      n.children.push_back(close(std::move(f)));
    }
    return close(std::move(n));
  }

  Node switch_construct(NodeKind k) {
    Node n = open(k);
    ++pos_;
    n.children.push_back(parenthesized_condition());
    if (!expect_op("{")) return close(std::move(n));
    while (!is_op("}") && !at_eof()) {
      std::size_t before = pos_;
      if (is_kw("case") || is_kw("default")) {
        n.children.push_back(switch_case());
      } else {
        error_here("expected 'case' or 'default'");
        n.children.push_back(recover(pos_));
      }
      if (pos_ == before) skip_one_as_error(n);
    }
    expect_op("}");
    return close(std::move(n));
  }

  Node switch_case() {
    Node c = open(NodeKind::SwitchCase);
    if (is_kw("default")) {
      ++pos_;
    } else {
      ++pos_;  // case
      while (true) {
        std::size_t before = pos_;
        if (is_kw("default") || kind(pos_) == TokenKind::Null) {
          ++pos_;
        } else {
          std::size_t q = scan_type(skip_decl_modifiers(pos_), false);
          if (q != kNpos && is_ident_at(q) && !is_word_at(q, "when")) {
            Node holder = open(NodeKind::Error);
            modifiers(holder);
            (void)type(false);
            ++pos_;  // binding
          } else if (q != kNpos && is_op_at(q, "(") && is_ident_at(pos_) &&
                     std::isupper(static_cast<unsigned char>(text(pos_)[0]))) {
            // record pattern
            (void)type(false);
            std::size_t end = skip_balanced(pos_);
            pos_ = end == kNpos ? pos_ + 1 : end;
            if (is_ident_at(pos_) && !is_word_at(pos_, "when")) ++pos_;
          } else {
            (void)ternary();
          }
        }
        if (!accept_op(",") || pos_ == before) break;
      }
      if (is_word_at(pos_, "when")) {
        ++pos_;
        (void)expression();
      }
    }
    if (is_op("->")) {
      role(pos_, TokenRole::Spaced);
      ++pos_;
      if (is_op("{")) {
        c.children.push_back(block());
      } else if (is_kw("throw")) {
        c.children.push_back(statement());
      } else {
        Node s = open(NodeKind::ExpressionStmt);
        s.children.push_back(expression());
        expect_op(";");
        c.children.push_back(close(std::move(s)));
      }
      return close(std::move(c));
    }
    expect_op(":");
    while (!is_kw("case") && !is_kw("default") && !is_op("}") && !at_eof()) {
      std::size_t before = pos_;
      c.children.push_back(block_statement());
      if (pos_ == before) skip_one_as_error(c);
    }
    // "default" can also start a statement-level construct only inside
    // interfaces, so treating it as a label here is safe.
    return close(std::move(c));
  }

  // ---- expressions ---------------------------------------------------------

  Node expression() {
    if (++depth_ > kMaxDepth) return too_deep();
    Node result = expression_inner();
    --depth_;
    return result;
  }

  Node expression_inner() {
    if (lambda_ahead()) return lambda();
    Node lhs = ternary();
    std::size_t width = assignment_width();
    if (width == 0) return lhs;
    Node a = open(NodeKind::Assign);
    a.first = lhs.first;
    a.op = static_cast<std::uint32_t>(pos_);
    role(pos_, TokenRole::Spaced);
    for (std::size_t i = 1; i < width; ++i) role(pos_ + i, TokenRole::SpacedCont);
    pos_ += width;
    a.children.push_back(std::move(lhs));
    a.children.push_back(expression());
    return close(std::move(a));
  }

  std::size_t assignment_width() const {
    if (kind(pos_) != TokenKind::Operator) return 0;
    if (is_assign_op(text(pos_))) return 1;
    if (is_op(">") && is_op_at(pos_ + 1, ">") && glued(pos_)) {
      if (is_op_at(pos_ + 2, "=") && glued(pos_ + 1)) return 3;
      if (is_op_at(pos_ + 2, ">") && glued(pos_ + 1) && is_op_at(pos_ + 3, "=") &&
          glued(pos_ + 2)) {
        return 4;
      }
    }
    return 0;
  }

  Node lambda() {
    Node l = open(NodeKind::Lambda);
    if (is_op("(")) {
      ++pos_;
      while (!is_op(")") && !at_eof()) {
        std::size_t before = pos_;
        Node p = open(NodeKind::Parameter);
        modifiers(p);
        std::size_t q = scan_type(pos_, false);
        if (q != kNpos && (is_ident_at(q) || is_kw_at(q, "_"))) {
          p.children.push_back(type(false));
        } else if (q != kNpos && is_op_at(q, "...")) {
          p.children.push_back(type(false));
          ++pos_;
        }
        if (is_ident_at(pos_) || is_kw("_")) {
          p.name = static_cast<std::uint32_t>(pos_);
          ++pos_;
        } else {
          error_here("expected lambda parameter");
        }
        l.children.push_back(close(std::move(p)));
        if (!accept_op(",") || pos_ == before) break;
      }
      expect_op(")");
    } else {
      Node p = open(NodeKind::Parameter);
      p.name = static_cast<std::uint32_t>(pos_);
      ++pos_;
      l.children.push_back(close(std::move(p)));
    }
    role(pos_, TokenRole::Spaced);
    expect_op("->");
    if (is_op("{")) {
      l.children.push_back(block());
    } else {
      l.children.push_back(expression());
    }
    return close(std::move(l));
  }

  Node ternary() {
    Node cond = binary(1);
    if (!is_op("?")) return cond;
    Node t = open(NodeKind::Conditional);
    t.first = cond.first;
    role(pos_, TokenRole::Spaced);
    ++pos_;
    t.children.push_back(std::move(cond));
    t.children.push_back(expression());
    role(pos_, TokenRole::Spaced);
    expect_op(":");
    t.children.push_back(lambda_ahead() ? lambda() : ternary());
    return close(std::move(t));
  }

  BinaryOp binary_op_here() const {
    if (is_kw("instanceof")) return {7, 1, true};
    if (kind(pos_) != TokenKind::Operator) return {};
    std::string_view t = text(pos_);
    if (t == "||") return {1, 1};
    if (t == "&&") return {2, 1};
    if (t == "|") return {3, 1};
    if (t == "^") return {4, 1};
    if (t == "&") return {5, 1};
    if (t == "==" || t == "!=") return {6, 1};
    if (t == "<" || t == "<=") return {7, 1};
    if (t == ">") {
      if (is_op_at(pos_ + 1, ">") && glued(pos_)) {
        if (is_op_at(pos_ + 2, ">") && glued(pos_ + 1)) {
          if (is_op_at(pos_ + 3, "=") && glued(pos_ + 2)) return {};
          return {8, 3};
        }
        if (is_op_at(pos_ + 2, "=") && glued(pos_ + 1)) return {};
        return {8, 2};
      }
      if (is_op_at(pos_ + 1, "=") && glued(pos_)) return {7, 2};
      return {7, 1};
    }
    if (t == "<<") return {8, 1};
    if (t == "+" || t == "-") return {9, 1};
    if (t == "*" || t == "/" || t == "%") return {10, 1};
    return {};
  }

  Node binary(int min_precedence) {
    Node lhs = unary();
    while (true) {
      BinaryOp op = binary_op_here();
      if (op.precedence == 0 || op.precedence < min_precedence) return lhs;
      if (op.instance_of) {
        Node n = open(NodeKind::InstanceOf);
        n.first = lhs.first;
        n.op = static_cast<std::uint32_t>(pos_);
        ++pos_;
        if (is_kw("final")) ++pos_;
        n.children.push_back(std::move(lhs));
        n.children.push_back(type(false));
        if (is_op("(")) {
          std::size_t end = skip_balanced(pos_);
          pos_ = end == kNpos ? pos_ + 1 : end;
        }
        if (is_ident_at(pos_) && !is_word_at(pos_, "when")) {
          n.name = static_cast<std::uint32_t>(pos_);
          ++pos_;
        }
        lhs = close(std::move(n));
        continue;
      }
      Node n = open(NodeKind::Binary);
      n.first = lhs.first;
      n.op = static_cast<std::uint32_t>(pos_);
      role(pos_, TokenRole::Spaced);
      for (std::size_t i = 1; i < op.width; ++i) role(pos_ + i, TokenRole::SpacedCont);
      pos_ += op.width;
      n.children.push_back(std::move(lhs));
      n.children.push_back(binary(op.precedence + 1));
      lhs = close(std::move(n));
    }
  }

  Node unary() {
    if (++depth_ > kMaxDepth) return too_deep();
    Node result = unary_inner();
    --depth_;
    return result;
  }

  Node unary_inner() {
    if (kind(pos_) == TokenKind::Operator) {
      std::string_view t = text(pos_);
      if (t == "+" || t == "-" || t == "++" || t == "--" || t == "!" || t == "~") {
        Node n = open(NodeKind::Unary);
        n.op = static_cast<std::uint32_t>(pos_);
        role(pos_, TokenRole::Unary);
        ++pos_;
        n.children.push_back(unary());
        return close(std::move(n));
      }
      if (t == "(" && cast_ahead()) {
        Node c = open(NodeKind::Cast);
        ++pos_;
        c.children.push_back(type(false));
        while (is_op("&")) {
          role(pos_, TokenRole::Spaced);
          ++pos_;
          c.children.push_back(type(false));
        }
        role(pos_, TokenRole::CastClose);
        expect_op(")");
        c.children.push_back(lambda_ahead() ? lambda() : unary());
        return close(std::move(c));
      }
    }
    Node e = postfix();
    return e;
  }

  Node postfix() {
    Node e = primary();
    if (e.kind == NodeKind::Error) return e;
    e = selectors(std::move(e));
    while (is_op("++") || is_op("--")) {
      Node p = open(NodeKind::Postfix);
      p.first = e.first;
      p.op = static_cast<std::uint32_t>(pos_);
      role(pos_, TokenRole::Postfix);
      ++pos_;
      p.children.push_back(std::move(e));
      e = close(std::move(p));
    }
    return e;
  }

  void arguments(Node& call) {
    if (!expect_op("(")) return;
    while (!is_op(")") && !at_eof()) {
      std::size_t before = pos_;
      call.children.push_back(expression());
      if (!accept_op(",") || pos_ == before) break;
    }
    expect_op(")");
  }

  Node selectors(Node e) {
    while (true) {
      if (is_op(".")) {
        std::size_t dot = pos_;
        ++pos_;
        if (is_op("<")) type_args();
        if (is_ident_at(pos_) || is_kw("_")) {
          std::size_t name = pos_;
          ++pos_;
          Node n = open(is_op("(") ? NodeKind::Call : NodeKind::FieldAccess);
          n.first = e.first;
          n.name = static_cast<std::uint32_t>(name);
          n.flags |= Node::kHasReceiver;
          n.children.push_back(std::move(e));
          if (n.kind == NodeKind::Call) arguments(n);
          e = close(std::move(n));
          continue;
        }
        if (is_kw("new")) {
          Node inner = creator();
          Node n = open(NodeKind::New);
          n.first = e.first;
          n.flags |= Node::kHasReceiver;
          n.children.push_back(std::move(e));
          for (auto& ch : inner.children) n.children.push_back(std::move(ch));
          e = close(std::move(n));
          continue;
        }
        if (is_kw("this") || is_kw("class") || is_kw("super")) {
          Node n = open(is_kw("class") ? NodeKind::ClassLiteral : NodeKind::FieldAccess);
          n.first = e.first;
          n.name = static_cast<std::uint32_t>(pos_);
          n.flags |= Node::kHasReceiver;
          ++pos_;
          n.children.push_back(std::move(e));
          if (is_op("(")) {
            n.kind = NodeKind::Call;
            arguments(n);
          }
          e = close(std::move(n));
          continue;
        }
        error_at(pos_, "expected member name after '.'");
        pos_ = dot + 1;
        return e;
      }
      if (is_op("[")) {
        Node n = open(NodeKind::ArrayAccess);
        n.first = e.first;
        ++pos_;
        n.children.push_back(std::move(e));
        n.children.push_back(expression());
        expect_op("]");
        e = close(std::move(n));
        continue;
      }
      if (is_op("::")) {
        Node n = open(NodeKind::MethodRef);
        n.first = e.first;
        ++pos_;
        if (is_op("<")) type_args();
        if (is_ident_at(pos_) || is_kw("new")) {
          n.name = static_cast<std::uint32_t>(pos_);
          ++pos_;
        } else {
          error_here("expected method reference name");
        }
        n.children.push_back(std::move(e));
        e = close(std::move(n));
        continue;
      }
      return e;
    }
  }

  Node creator() {
    Node n = open(NodeKind::New);
    ++pos_;  // new
    if (is_op("<")) type_args();
    Node t = open(NodeKind::Type);
    Node holder = open(NodeKind::Error);
    annotations(holder);
    if (kind(pos_) == TokenKind::Keyword && is_primitive_type(text(pos_))) {
      ++pos_;
    } else if (is_ident_at(pos_)) {
      ++pos_;
      while (true) {
        if (is_op("<")) type_args();
        if (is_op(".") && is_ident_at(pos_ + 1)) {
          pos_ += 2;
          continue;
        }
        break;
      }
    } else {
      error_here("expected type after 'new'");
      n.kind = NodeKind::Error;
      return close(std::move(n));
    }
    n.children.push_back(close(std::move(t)));
    if (is_op("[")) {
      n.kind = NodeKind::NewArray;
      while (is_op("[")) {
        ++pos_;
        if (!is_op("]")) n.children.push_back(expression());
        expect_op("]");
      }
      if (is_op("{")) n.children.push_back(array_initializer());
      return close(std::move(n));
    }
    arguments(n);
    if (is_op("{")) {
      Node body = open(NodeKind::ClassDecl);
      class_body(body, false);
      n.children.push_back(close(std::move(body)));
    }
    return close(std::move(n));
  }

  Node primary() {
    TokenKind k = kind(pos_);
    if (is_literal(k)) {
      Node n = open(NodeKind::Literal);
      ++pos_;
      return close(std::move(n));
    }
    if (k == TokenKind::Identifier || is_kw("_")) {
      std::size_t name = pos_;
      ++pos_;
      if (is_op("(")) {
        Node n = open(NodeKind::Call);
        n.first = static_cast<std::uint32_t>(name);
        n.name = static_cast<std::uint32_t>(name);
        arguments(n);
        return close(std::move(n));
      }
      // Generic type used as a method reference target: List<String>::new
      if (is_op("<")) {
        std::size_t q = scan_type(name, false);
        if (q != kNpos && is_op_at(q, "::")) {
          pos_ = name;
          Node n = type(false);
          n.kind = NodeKind::Name;
          return n;
        }
      }
      Node n = open(NodeKind::Name);
      n.first = static_cast<std::uint32_t>(name);
      n.name = static_cast<std::uint32_t>(name);
      return close(std::move(n));
    }
    if (k == TokenKind::Keyword) {
      std::string_view t = text(pos_);
      if (t == "this" || t == "super") {
        Node n = open(t == "this" ? NodeKind::This : NodeKind::Super);
        n.name = static_cast<std::uint32_t>(pos_);
        ++pos_;
        if (is_op("(")) {
          n.kind = NodeKind::Call;
          arguments(n);
        }
        return close(std::move(n));
      }
      if (t == "new") return creator();
      if (t == "switch") return switch_construct(NodeKind::SwitchExpr);
      if (is_primitive_type(t) || t == "void") {
        Node n = open(NodeKind::ClassLiteral);
        ++pos_;
        while (is_op("[") && is_op_at(pos_ + 1, "]")) pos_ += 2;
        if (is_op("::")) return close(std::move(n));
        if (is_op(".") && is_kw_at(pos_ + 1, "class")) {
          pos_ += 2;
        } else {
          error_here("expected '.class'");
        }
        return close(std::move(n));
      }
    }
    if (is_op("(")) {
      Node n = open(NodeKind::Paren);
      ++pos_;
      n.children.push_back(expression());
      expect_op(")");
      return close(std::move(n));
    }
    if (is_op("{")) {
      return array_initializer();
    }
    if (at_eof()) {
      error_here("unexpected end of input");
    } else {
      error_here("expected expression, found '" + std::string(text(pos_)) + "'");
    }
    Node err = open(NodeKind::Error);
    return close(std::move(err));
  }

  std::string_view src_;
  const std::vector<Token>& toks_;
  std::vector<TokenRole>& roles_;
  std::vector<ParseError>& errors_;
  std::size_t pos_ = 0;
  std::size_t last_error_token_ = kNpos;
  int depth_ = 0;
};

enum class Entry { Source, Statements, Expression };

SyntaxTree parse_with(std::string source, Entry entry) {
  LexResult lexed = lex(source);
  std::vector<TokenRole> roles(lexed.tokens.size(), TokenRole::Plain);
  std::vector<ParseError> errors;
  for (const Token& t : lexed.tokens) {
    if (t.kind == TokenKind::Error) {
      errors.push_back({t.line, t.column, "unrecognized character"});
    }
  }
  Node root;
  {
    Parser parser(source, lexed, roles, errors);
    switch (entry) {
      case Entry::Source: root = parser.compilation_unit(); break;
      case Entry::Statements: root = parser.statement_list(); break;
      case Entry::Expression: root = parser.single_expression(); break;
    }
  }
  return SyntaxTree(std::move(source), std::move(lexed), std::move(roles), std::move(root),
                    std::move(errors));
}

}  // namespace

SyntaxTree parse_source(std::string source) { return parse_with(std::move(source), Entry::Source); }

SyntaxTree parse_statements(std::string source) {
  return parse_with(std::move(source), Entry::Statements);
}

SyntaxTree parse_expression(std::string source) {
  return parse_with(std::move(source), Entry::Expression);
}

}  // namespace robgen::java
