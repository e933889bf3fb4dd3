#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace robgen::java {

struct ParamInfo {
  std::string type;  // whitespace-collapsed, annotations and 'final' dropped
  std::string name;
  bool primitive = false;  // primitive type without array dimensions
  bool array = false;
  bool varargs = false;

  bool is_reference() const { return !primitive; }
};

// A method or constructor header followed by an opening brace, found by a
// token scan that tolerates an unfinished body.
struct SignatureInfo {
  std::string name;
  std::vector<ParamInfo> params;
  std::size_t start = 0;       // offset of the first modifier/annotation/type token
  std::size_t name_offset = 0;
  std::size_t body_open = 0;   // offset of '{'
  std::uint32_t start_line = 1;
  std::uint32_t body_open_line = 1;
  bool constructor = false;  // no return type
};

// First header in `source` at or after byte `from`.
std::optional<SignatureInfo> find_signature(std::string_view source, std::size_t from = 0);

// Offset just past the '}' that closes the brace opened at `open`, or
// nothing if the braces never balance.
std::optional<std::size_t> matching_brace(std::string_view source, std::size_t open);

// Collapses whitespace between tokens, dropping comments; used to compare
// signatures regardless of layout.
std::string token_string(std::string_view source);

}  // namespace robgen::java
