#include "robgen/snippet.hpp"

#include "robgen/error.hpp"

namespace robgen {

std::string_view to_string(Origin origin) noexcept {
  return origin == Origin::Generated ? "generated" : "reference";
}

Origin origin_from_string(std::string_view text) {
  if (text == "generated") return Origin::Generated;
  if (text == "reference") return Origin::Reference;
  throw Error(ErrorKind::Format, "unknown origin '" + std::string(text) + "'");
}

void to_json(nlohmann::json& j, const CodeSnippet& s) {
  j = {{"id", s.id}, {"source", s.source}, {"origin", to_string(s.origin)}, {"language", s.language}};
}

void from_json(const nlohmann::json& j, CodeSnippet& s) {
  s.id = j.at("id").get<std::string>();
  s.source = j.at("source").get<std::string>();
  s.origin = origin_from_string(j.value("origin", std::string("generated")));
  s.language = j.value("language", std::string("java"));
}

}  // namespace robgen
