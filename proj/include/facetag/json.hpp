#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace facetag {

// Insertion-ordered JSON keeps field order stable in every emitted file.
using Json = nlohmann::ordered_json;

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

// Reads non-blank lines as JSON objects; errors carry 1-based line numbers.
std::vector<Json> read_jsonl(std::istream& in, const std::string& source);
std::vector<Json> read_jsonl_file(const std::string& path);
void write_jsonl_file(const std::string& path, const std::vector<Json>& rows);

// Compact single-line dump with replacement of invalid UTF-8.
std::string dump_line(const Json& j);

}  // namespace facetag
