#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace polar {

using Json = nlohmann::json;

// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

// Parses a whole-document JSON file, reporting the line of a syntax error.
Json parse_json_document(const std::string& text);

// One JSON object per non-empty line.
std::vector<Json> parse_json_lines(const std::string& text);
std::string dump_json_lines(const std::vector<Json>& rows);

}  // namespace polar
