#include "facetag/json.hpp"

#include <fstream>

#include "facetag/error.hpp"

namespace facetag {

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, "'" + path + "': " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path + "'");
  out << j.dump(2, ' ', false, Json::error_handler_t::replace) << '\n';
  if (!out) fail(ErrorCode::Io, "write failed for '" + path + "'");
}

std::vector<Json> read_jsonl(std::istream& in, const std::string& source) {
  std::vector<Json> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      rows.push_back(Json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::Parse,
           source + ":" + std::to_string(lineno) + ": malformed line: " + e.what());
    }
    if (!rows.back().is_object()) {
      fail(ErrorCode::Parse, source + ":" + std::to_string(lineno) + ": expected a JSON object");
    }
  }
  return rows;
}

std::vector<Json> read_jsonl_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "'");
  return read_jsonl(in, path);
}

void write_jsonl_file(const std::string& path, const std::vector<Json>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path + "'");
  for (const auto& r : rows) out << dump_line(r) << '\n';
  if (!out) fail(ErrorCode::Io, "write failed for '" + path + "'");
}

std::string dump_line(const Json& j) {
  return j.dump(-1, ' ', false, Json::error_handler_t::replace);
}

}  // namespace facetag
