#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace robgen::java {

enum class TokenKind : std::uint8_t {
  Identifier,
  Keyword,
  Number,
  Char,
  String,
  Null,
  Boolean,
  Operator,  // punctuation and operators; '>' is always a single token
  Error,     // a byte sequence the lexer could not classify
  Eof,
};

struct Token {
  TokenKind kind = TokenKind::Eof;
  std::uint32_t offset = 0;  // byte offset into the source
  std::uint32_t length = 0;
  std::uint32_t line = 1;    // 1-based line of the first byte
  std::uint32_t column = 1;  // 1-based byte column
  std::uint32_t end_line = 1;

  std::uint32_t end() const { return offset + length; }
};

struct Comment {
  std::uint32_t offset = 0;
  std::uint32_t length = 0;
  std::uint32_t line = 1;
  std::uint32_t end_line = 1;
};

struct LexResult {
  std::vector<Token> tokens;  // always terminated by an Eof token
  std::vector<Comment> comments;
  std::uint32_t line_count = 1;
};

// Never fails: unknown bytes and unterminated literals become Error tokens
// (or are closed at end of line) so that prose mixed with code still lexes.
LexResult lex(std::string_view source);

bool is_keyword(std::string_view word);
bool is_primitive_type(std::string_view word);
bool is_literal(TokenKind kind);
bool is_wordlike(TokenKind kind);

}  // namespace robgen::java
