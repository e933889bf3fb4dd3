#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace robgen::io {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// One JSON value per non-blank line. Errors name the file and line.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& rows);

// Regular files under root with the given extension, sorted by path.
std::vector<std::filesystem::path> list_files(const std::filesystem::path& root,
                                              std::string_view extension);

}  // namespace robgen::io
