#include "robgen/java/signature.hpp"

#include <algorithm>
#include <array>

#include "robgen/java/lexer.hpp"

namespace robgen::java {

namespace {

constexpr std::array<std::string_view, 12> kModifiers{
    "public", "private", "protected", "static", "final", "abstract",
    "synchronized", "native", "strictfp", "default", "transient", "volatile"};

bool is_modifier(std::string_view w) {
  return std::find(kModifiers.begin(), kModifiers.end(), w) != kModifiers.end();
}

class Scan {
 public:
  explicit Scan(std::string_view src) : src_(src), lexed_(lex(src)) {}

  std::string_view text(std::size_t i) const {
    const Token& t = lexed_.tokens[i];
    return src_.substr(t.offset, t.length);
  }
  const Token& tok(std::size_t i) const { return lexed_.tokens[i]; }
  std::size_t size() const { return lexed_.tokens.size() - 1; }  // without Eof
  bool is(std::size_t i, std::string_view s) const { return i < size() && text(i) == s; }

  // Index of the bracket closing the one at i (same kind), or npos.
  std::size_t close_of(std::size_t i, std::string_view open, std::string_view close) const {
    int depth = 0;
    for (std::size_t j = i; j < size(); ++j) {
      if (text(j) == open) ++depth;
      else if (text(j) == close && --depth == 0) return j;
    }
    return npos;
  }

  // Index of the bracket opening the one closing at i, or npos.
  std::size_t open_of(std::size_t i, std::string_view open, std::string_view close) const {
    int depth = 0;
    for (std::size_t j = i + 1; j-- > 0;) {
      if (text(j) == close) ++depth;
      else if (text(j) == open && --depth == 0) return j;
    }
    return npos;
  }

  // Walks back over a qualified name ending at i; returns its first index.
  std::size_t qualified_back(std::size_t i) const {
    while (i >= 2 && text(i - 1) == "." && tok(i - 2).kind == TokenKind::Identifier) i -= 2;
    return i;
  }

  // A type ending at token i, scanned backwards. Returns its first index.
  std::optional<std::size_t> type_back(std::size_t i) const {
    while (i >= 1 && text(i) == "]" && text(i - 1) == "[") {
      if (i < 2) return std::nullopt;
      i -= 2;
    }
    if (text(i) == ">") {
      std::size_t o = open_of(i, "<", ">");
      if (o == npos || o == 0) return std::nullopt;
      i = o - 1;
    }
    if (tok(i).kind == TokenKind::Keyword)
      return is_primitive_type(text(i)) || text(i) == "void" ? std::optional(i) : std::nullopt;
    if (tok(i).kind != TokenKind::Identifier) return std::nullopt;
    return qualified_back(i);
  }

  // Modifiers and annotations ending at token i; returns the first index
  // of the run (i + 1 when there are none).
  std::size_t prefix_back(std::size_t i) const {
    std::size_t first = i + 1;
    for (std::size_t j = i; j != npos;) {
      std::string_view w = text(j);
      if (tok(j).kind == TokenKind::Keyword && is_modifier(w)) {
        first = j;
        j = j == 0 ? npos : j - 1;
        continue;
      }
      std::size_t k = j;
      if (w == ")") {
        k = open_of(j, "(", ")");
        if (k == npos || k == 0) break;
        --k;
      }
      if (tok(k).kind != TokenKind::Identifier) break;
      k = qualified_back(k);
      if (k == 0 || text(k - 1) != "@") break;
      first = k - 1;
      j = k >= 2 ? k - 2 : npos;
    }
    return first;
  }

  std::vector<ParamInfo> params(std::size_t open, std::size_t close) const {
    std::vector<ParamInfo> out;
    std::size_t start = open + 1;
    int angle = 0, paren = 0;
    for (std::size_t j = open + 1; j <= close; ++j) {
      std::string_view w = text(j);
      if (w == "<") ++angle;
      else if (w == ">") --angle;
      else if (w == "(") ++paren;
      else if (w == ")" && j != close) --paren;
      if ((w == "," && angle <= 0 && paren == 0) || j == close) {
        if (j > start) out.push_back(param(start, j));
        start = j + 1;
      }
    }
    return out;
  }

  ParamInfo param(std::size_t b, std::size_t e) const {
    ParamInfo p;
    std::size_t j = b;
    // leading annotations and 'final'
    while (j < e) {
      if (text(j) == "final") {
        ++j;
      } else if (text(j) == "@" && j + 1 < e) {
        j += 2;
        while (j + 1 < e && text(j) == ".") j += 2;
        if (j < e && text(j) == "(") {
          std::size_t c = close_of(j, "(", ")");
          j = c == npos ? e : c + 1;
        }
      } else {
        break;
      }
    }
    std::size_t name = e - 1;
    // C-style dims after the name: String args[]
    std::size_t dims_after = 0;
    while (name > j + 1 && text(name) == "]" && text(name - 1) == "[") {
      name -= 2;
      ++dims_after;
    }
    p.name = std::string(text(name));
    std::string type;
    for (std::size_t k = j; k < name; ++k) {
      std::string_view w = text(k);
      if (w == "...") p.varargs = true;
      if (w == "[") p.array = true;
      if (!type.empty() && is_wordlike(tok(k).kind) && is_wordlike(tok(k - 1).kind)) type += ' ';
      if (w == "," ) {
        type += ", ";
        continue;
      }
      type += w;
    }
    if (dims_after) p.array = true;
    for (std::size_t d = 0; d < dims_after; ++d) type += "[]";
    p.type = type;
    p.primitive = j < name && is_primitive_type(text(j)) && !p.array && !p.varargs;
    return p;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::string_view src_;
  LexResult lexed_;
};

}  // namespace

std::optional<SignatureInfo> find_signature(std::string_view source, std::size_t from) {
  Scan s(source);
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (s.tok(i).offset < from) continue;
    if (s.tok(i).kind != TokenKind::Identifier || !s.is(i + 1, "(")) continue;
    if (i > 0) {
      std::string_view prev = s.text(i - 1);
      if (prev == "new" || prev == "." || prev == "@" || prev == "record" || prev == "::") continue;
    }
    std::size_t close = s.close_of(i + 1, "(", ")");
    if (close == Scan::npos) continue;
    std::size_t j = close + 1;
    if (s.is(j, "throws")) {
      ++j;
      while (j < s.size() && (s.tok(j).kind == TokenKind::Identifier || s.text(j) == "." || s.text(j) == "," ||
                              s.text(j) == "<" || s.text(j) == ">"))
        ++j;
    }
    if (!s.is(j, "{")) continue;

    SignatureInfo info;
    info.name = std::string(s.text(i));
    info.params = s.params(i + 1, close);
    info.name_offset = s.tok(i).offset;
    info.body_open = s.tok(j).offset;
    info.body_open_line = s.tok(j).line;

    std::size_t first = i;
    if (i > 0) {
      auto type_first = s.type_back(i - 1);
      if (type_first) {
        first = *type_first;
        if (first > 0 && s.text(first - 1) == ">") {  // <T> type parameters
          std::size_t o = s.open_of(first - 1, "<", ">");
          if (o != Scan::npos) first = o;
        }
      } else {
        info.constructor = true;
      }
      if (first > 0) first = std::min(first, s.prefix_back(first - 1));
    } else {
      info.constructor = true;
    }
    // a control keyword in front means this was a statement, not a header
    if (info.constructor && i > 0 && s.tok(i - 1).kind == TokenKind::Keyword && !is_modifier(s.text(i - 1)))
      continue;
    info.start = s.tok(first).offset;
    info.start_line = s.tok(first).line;
    return info;
  }
  return std::nullopt;
}

std::optional<std::size_t> matching_brace(std::string_view source, std::size_t open) {
  LexResult lexed = lex(source);
  int depth = 0;
  bool started = false;
  for (const auto& t : lexed.tokens) {
    if (t.kind == TokenKind::Eof) break;
    if (t.offset < open) continue;
    std::string_view w = source.substr(t.offset, t.length);
    if (w == "{") {
      ++depth;
      started = true;
    } else if (w == "}" && started && --depth == 0) {
      return t.end();
    }
  }
  return std::nullopt;
}

std::string token_string(std::string_view source) {
  LexResult lexed = lex(source);
  std::string out;
  for (const auto& t : lexed.tokens) {
    if (t.kind == TokenKind::Eof) break;
    if (!out.empty()) out += ' ';
    out += source.substr(t.offset, t.length);
  }
  return out;
}

}  // namespace robgen::java
