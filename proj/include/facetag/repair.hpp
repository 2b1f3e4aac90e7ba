#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "facetag/json.hpp"

namespace facetag {

// Unit-cost Levenshtein distance over Unicode code points (invalid UTF-8
// bytes count as one character each).
std::size_t levenshtein(std::string_view a, std::string_view b);

// Lowercases ASCII letters and strips surrounding whitespace.
std::string normalize_label_text(std::string_view raw);

struct PredictionRecord {
  std::string example_id;
  int fold = -1;
  std::string raw;
  std::string label;
  std::size_t distance = 0;
  bool repaired = false;
  bool tie_broken = false;

  bool operator==(const PredictionRecord&) const = default;
};

// Maps a raw generated string onto the closest member of labelset. Among
// equally close labels the one with the highest train_freqs count wins,
// then the one listed first. Throws Error(InvalidArgument) on an empty
// labelset; otherwise total.
PredictionRecord repair_label(std::string_view raw, const std::vector<std::string>& labelset,
                              const std::map<std::string, std::size_t>& train_freqs);

Json prediction_to_json(const PredictionRecord& p);
PredictionRecord prediction_from_json(const Json& j);
std::vector<PredictionRecord> load_predictions(const std::string& path);
void save_predictions(const std::string& path, const std::vector<PredictionRecord>& records);

}  // namespace facetag
