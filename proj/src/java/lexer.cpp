#include "robgen/java/lexer.hpp"

#include <algorithm>
#include <array>

namespace robgen::java {
namespace {

constexpr std::array<std::string_view, 51> kKeywords = {
    "abstract", "assert",     "boolean",   "break",      "byte",      "case",
    "catch",    "char",       "class",     "const",      "continue",  "default",
    "do",       "double",     "else",      "enum",       "extends",   "final",
    "finally",  "float",      "for",       "goto",       "if",        "implements",
    "import",   "instanceof", "int",       "interface",  "long",      "native",
    "new",      "package",    "private",   "protected",  "public",    "return",
    "short",    "static",     "strictfp",  "super",      "switch",    "synchronized",
    "this",     "throw",      "throws",    "transient",  "try",       "void",
    "volatile", "while",      "_"};

// Longest first so that a linear scan finds the maximal munch. '>' is left
// out of every multi-character operator: the parser glues adjacent '>'
// tokens back into shifts and comparisons.
constexpr std::array<std::string_view, 34> kOperators = {
    "<<=", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", "+=",
    "-=",  "*=",  "/=", "&=", "|=", "^=", "%=", "<<", "(",  ")",  "{",  "}",
    "[",   "]",   ";",  ",",  ".",  "@",  "=",  ">",  "<",  "!"};

constexpr std::string_view kSingleOps = "~?:+-*/&|^%";

bool ident_start(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '$' || c >= 0x80;
}

bool ident_part(unsigned char c) { return ident_start(c) || (c >= '0' && c <= '9'); }

bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

bool is_hex(unsigned char c) {
  return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  LexResult run() {
    LexResult out;
    while (true) {
      skip_space_and_comments(out);
      if (pos_ >= src_.size()) break;
      out.tokens.push_back(next_token());
    }
    Token eof;
    eof.kind = TokenKind::Eof;
    eof.offset = static_cast<std::uint32_t>(src_.size());
    eof.line = eof.end_line = line_;
    eof.column = col_;
    out.tokens.push_back(eof);
    out.line_count = line_;
    return out;
  }

 private:
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space_and_comments(LexResult& out) {
    while (pos_ < src_.size()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        Comment cm{static_cast<std::uint32_t>(pos_), 0, line_, line_};
        while (pos_ < src_.size() && peek() != '\n') advance();
        cm.length = static_cast<std::uint32_t>(pos_) - cm.offset;
        out.comments.push_back(cm);
      } else if (c == '/' && peek(1) == '*') {
        Comment cm{static_cast<std::uint32_t>(pos_), 0, line_, line_};
        advance();
        advance();
        while (pos_ < src_.size() && !(peek() == '*' && peek(1) == '/')) advance();
        if (pos_ < src_.size()) {
          advance();
          advance();
        }
        cm.length = static_cast<std::uint32_t>(pos_) - cm.offset;
        cm.end_line = line_;
        out.comments.push_back(cm);
      } else {
        break;
      }
    }
  }

  Token next_token() {
    Token t;
    t.offset = static_cast<std::uint32_t>(pos_);
    t.line = line_;
    t.column = col_;
    unsigned char c = static_cast<unsigned char>(peek());

    if (ident_start(c)) {
      while (pos_ < src_.size() && ident_part(static_cast<unsigned char>(peek()))) advance();
      std::string_view word = src_.substr(t.offset, pos_ - t.offset);
      if (word == "null") {
        t.kind = TokenKind::Null;
      } else if (word == "true" || word == "false") {
        t.kind = TokenKind::Boolean;
      } else if (is_keyword(word)) {
        t.kind = TokenKind::Keyword;
      } else {
        t.kind = TokenKind::Identifier;
      }
    } else if (is_digit(c) || (c == '.' && is_digit(static_cast<unsigned char>(peek(1))))) {
      lex_number();
      t.kind = TokenKind::Number;
    } else if (c == '"') {
      lex_string();
      t.kind = TokenKind::String;
    } else if (c == '\'') {
      t.kind = lex_char() ? TokenKind::Char : TokenKind::Error;
    } else if (!lex_operator()) {
      advance();
      t.kind = TokenKind::Error;
    } else {
      t.kind = TokenKind::Operator;
    }
    t.length = static_cast<std::uint32_t>(pos_) - t.offset;
    t.end_line = line_;
    return t;
  }

  void lex_number() {
    if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
      advance();
      advance();
      while (is_hex(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '.') advance();
      if (peek() == 'p' || peek() == 'P') {
        advance();
        if (peek() == '+' || peek() == '-') advance();
      }
    } else if (peek() == '0' && (peek(1) == 'b' || peek(1) == 'B')) {
      advance();
      advance();
    }
    while (true) {
      unsigned char c = static_cast<unsigned char>(peek());
      if (is_digit(c) || c == '_') {
        advance();
      } else if (c == '.' && is_digit(static_cast<unsigned char>(peek(1)))) {
        advance();
      } else if (c == '.' && !ident_start(static_cast<unsigned char>(peek(1))) && peek(1) != '.') {
        advance();  // "1." is a valid double literal
      } else if ((c == 'e' || c == 'E') &&
                 (is_digit(static_cast<unsigned char>(peek(1))) ||
                  ((peek(1) == '+' || peek(1) == '-') && is_digit(static_cast<unsigned char>(peek(2)))))) {
        advance();
        advance();
      } else {
        break;
      }
    }
    char s = peek();
    if (s == 'l' || s == 'L' || s == 'f' || s == 'F' || s == 'd' || s == 'D') advance();
  }

  void lex_string() {
    if (peek(1) == '"' && peek(2) == '"') {
      advance();
      advance();
      advance();
      while (pos_ < src_.size()) {
        if (peek() == '\\') {
          advance();
          if (pos_ < src_.size()) advance();
        } else if (peek() == '"' && peek(1) == '"' && peek(2) == '"') {
          advance();
          advance();
          advance();
          return;
        } else {
          advance();
        }
      }
      return;
    }
    advance();
    while (pos_ < src_.size() && peek() != '\n') {
      if (peek() == '\\') {
        advance();
        if (pos_ < src_.size() && peek() != '\n') advance();
      } else if (peek() == '"') {
        advance();
        return;
      } else {
        advance();
      }
    }
  }

  bool lex_char() {
    std::size_t start = pos_;
    std::uint32_t line = line_, col = col_;
    advance();
    while (pos_ < src_.size() && peek() != '\n' && pos_ - start < 12) {
      if (peek() == '\\') {
        advance();
        if (pos_ < src_.size() && peek() != '\n') advance();
      } else if (peek() == '\'') {
        advance();
        return true;
      } else {
        advance();
      }
    }
    // Not a character literal (an apostrophe in prose): emit just the quote.
    pos_ = start;
    line_ = line;
    col_ = col;
    advance();
    return false;
  }

  bool lex_operator() {
    std::string_view rest = src_.substr(pos_);
    for (std::string_view op : kOperators) {
      if (rest.substr(0, op.size()) == op) {
        for (std::size_t i = 0; i < op.size(); ++i) advance();
        return true;
      }
    }
    if (kSingleOps.find(peek()) != std::string_view::npos) {
      advance();
      return true;
    }
    return false;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::uint32_t line_ = 1;
  std::uint32_t col_ = 1;
};

}  // namespace

bool is_keyword(std::string_view word) {
  return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

bool is_primitive_type(std::string_view word) {
  return word == "int" || word == "long" || word == "short" || word == "byte" || word == "char" ||
         word == "boolean" || word == "float" || word == "double";
}

bool is_literal(TokenKind kind) {
  return kind == TokenKind::Number || kind == TokenKind::Char || kind == TokenKind::String ||
         kind == TokenKind::Null || kind == TokenKind::Boolean;
}

bool is_wordlike(TokenKind kind) {
  return kind == TokenKind::Identifier || kind == TokenKind::Keyword || is_literal(kind);
}

LexResult lex(std::string_view source) { return Lexer(source).run(); }

}  // namespace robgen::java
