#pragma once

#include <string>
#include <string_view>

#include "json.hpp"

namespace robgen {

enum class Origin { Generated, Reference };

std::string_view to_string(Origin origin) noexcept;
Origin origin_from_string(std::string_view text);

// A method (signature plus body) and where it came from.
struct CodeSnippet {
  std::string id;
  std::string source;
  Origin origin = Origin::Generated;
  std::string language = "java";
};

void to_json(nlohmann::json& j, const CodeSnippet& s);
void from_json(const nlohmann::json& j, CodeSnippet& s);

}  // namespace robgen
