#include "facetag/tagset.hpp"

#include <algorithm>
#include <set>

#include "facetag/error.hpp"

namespace facetag {

TagSet::TagSet(std::string id, std::vector<std::string> tags,
               std::map<std::string, std::string> collapse_map)
    : id_(std::move(id)), tags_(std::move(tags)), collapse_map_(std::move(collapse_map)) {
  std::set<std::string_view> seen;
  for (const auto& t : tags_) {
    if (t.empty()) fail(ErrorCode::Validation, "tagset '" + id_ + "': empty tag name");
    if (!seen.insert(t).second) {
      fail(ErrorCode::Validation, "tagset '" + id_ + "': duplicate tag '" + t + "'");
    }
  }
  for (const auto& [from, to] : collapse_map_) {
    if (!contains(to)) {
      fail(ErrorCode::Validation, "tagset '" + id_ + "': collapse target '" + to +
                                      "' (from '" + from + "') is not a member");
    }
  }
}

bool TagSet::contains(std::string_view tag) const noexcept {
  return index_of(tag).has_value();
}

std::optional<std::size_t> TagSet::index_of(std::string_view tag) const noexcept {
  auto it = std::find(tags_.begin(), tags_.end(), tag);
  if (it == tags_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - tags_.begin());
}

std::string TagSet::collapse(std::string_view tag) const {
  auto it = collapse_map_.find(std::string(tag));
  return it == collapse_map_.end() ? std::string(tag) : it->second;
}

Json TagSet::to_json() const {
  Json j;
  j["id"] = id_;
  j["tags"] = tags_;
  j["collapse_map"] = Json::object();
  for (const auto& [from, to] : collapse_map_) j["collapse_map"][from] = to;
  return j;
}

TagSet TagSet::from_json(const Json& j) {
  try {
    std::map<std::string, std::string> collapse;
    if (j.contains("collapse_map") && !j.at("collapse_map").is_null()) {
      collapse = j.at("collapse_map").get<std::map<std::string, std::string>>();
    }
    return TagSet(j.at("id").get<std::string>(),
                  j.at("tags").get<std::vector<std::string>>(), std::move(collapse));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("tagset: ") + e.what());
  }
}

TagSet mrda_basic_tagset() {
  return TagSet("mrda-basic",
                {"BackChannel", "Disruption", "FloorGrabber", "Question", "Statement",
                 "Unlabeled"},
                {{"Disruption", "Statement"}});
}

std::vector<TagSet> load_tagset_registry(const std::string& path) {
  const Json j = read_json_file(path);
  std::vector<TagSet> out;
  if (j.is_array()) {
    for (const auto& item : j) out.push_back(TagSet::from_json(item));
  } else {
    out.push_back(TagSet::from_json(j));
  }
  return out;
}

TagSet load_tagset(const std::string& path, std::string_view id) {
  auto registry = load_tagset_registry(path);
  if (registry.empty()) fail(ErrorCode::Validation, "tagset registry '" + path + "' is empty");
  if (id.empty()) return registry.front();
  for (auto& ts : registry) {
    if (ts.id() == id) return ts;
  }
  fail(ErrorCode::Validation, "tagset '" + std::string(id) + "' not found in '" + path + "'");
}

}  // namespace facetag
