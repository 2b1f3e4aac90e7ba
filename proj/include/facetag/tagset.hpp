#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "facetag/json.hpp"

namespace facetag {

// An ordered dialog-act inventory with an optional many-to-one collapse map
// (e.g. Disruption -> Statement).
class TagSet {
 public:
  TagSet() = default;
  // Throws Error(Validation) on duplicate tags or collapse targets outside tags.
  TagSet(std::string id, std::vector<std::string> tags,
         std::map<std::string, std::string> collapse_map = {});

  const std::string& id() const noexcept { return id_; }
  const std::vector<std::string>& tags() const noexcept { return tags_; }
  const std::map<std::string, std::string>& collapse_map() const noexcept {
    return collapse_map_;
  }

  bool contains(std::string_view tag) const noexcept;
  std::optional<std::size_t> index_of(std::string_view tag) const noexcept;
  // Applies the collapse map; tags without an entry map to themselves.
  std::string collapse(std::string_view tag) const;

  Json to_json() const;
  static TagSet from_json(const Json& j);

  bool operator==(const TagSet&) const = default;

 private:
  std::string id_;
  std::vector<std::string> tags_;
  std::map<std::string, std::string> collapse_map_;
};

// Default MRDA basic-level inventory: five basic tags plus a reserved
// Unlabeled slot, with Disruption collapsed onto Statement.
TagSet mrda_basic_tagset();

// Registry file: either a single tagset object or an array of them.
std::vector<TagSet> load_tagset_registry(const std::string& path);
TagSet load_tagset(const std::string& path, std::string_view id = {});

}  // namespace facetag
