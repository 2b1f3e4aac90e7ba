#include "facetag/repair.hpp"

#include <algorithm>
#include <limits>

#include "facetag/error.hpp"

namespace facetag {

namespace {

std::vector<char32_t> code_points(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = b0 < 0x80 ? 1 : (b0 >> 5) == 0x6 ? 2 : (b0 >> 4) == 0xE ? 3
                                   : (b0 >> 3) == 0x1E ? 4 : 0;
    bool valid = len > 0 && i + len <= s.size();
    for (std::size_t k = 1; valid && k < len; ++k) {
      valid = (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
    }
    if (!valid) {
      // Lone bytes are mapped above the Unicode range so they never equal a code point.
      out.push_back(0x110000u + b0);
      ++i;
      continue;
    }
    char32_t cp = len == 1 ? b0 : b0 & (0x7F >> len);
    for (std::size_t k = 1; k < len; ++k) {
      cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

}  // namespace

std::size_t levenshtein(std::string_view a, std::string_view b) {
  const auto x = code_points(a);
  const auto y = code_points(b);
  std::vector<std::size_t> prev(y.size() + 1), cur(y.size() + 1);
  for (std::size_t j = 0; j <= y.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= x.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      const std::size_t subst = prev[j - 1] + (x[i - 1] == y[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, subst});
    }
    std::swap(prev, cur);
  }
  return prev[y.size()];
}

std::string normalize_label_text(std::string_view raw) {
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  };
  while (!raw.empty() && is_space(raw.front())) raw.remove_prefix(1);
  while (!raw.empty() && is_space(raw.back())) raw.remove_suffix(1);
  std::string out(raw);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

PredictionRecord repair_label(std::string_view raw, const std::vector<std::string>& labelset,
                              const std::map<std::string, std::size_t>& train_freqs) {
  if (labelset.empty()) fail(ErrorCode::InvalidArgument, "repair_label: empty labelset");
  const std::string probe = normalize_label_text(raw);

  std::size_t best = 0;
  std::size_t best_distance = std::numeric_limits<std::size_t>::max();
  std::size_t best_freq = 0;
  std::size_t tied = 0;
  for (std::size_t i = 0; i < labelset.size(); ++i) {
    const std::size_t d = levenshtein(probe, normalize_label_text(labelset[i]));
    const auto it = train_freqs.find(labelset[i]);
    const std::size_t freq = it == train_freqs.end() ? 0 : it->second;
    if (d < best_distance) {
      best = i;
      best_distance = d;
      best_freq = freq;
      tied = 1;
    } else if (d == best_distance) {
      ++tied;
      if (freq > best_freq) {
        best = i;
        best_freq = freq;
      }
    }
  }

  PredictionRecord record;
  record.raw = std::string(raw);
  record.label = labelset[best];
  record.distance = best_distance;
  record.repaired = best_distance > 0 || record.raw != record.label;
  record.tie_broken = tied > 1;
  return record;
}

Json prediction_to_json(const PredictionRecord& p) {
  Json j;
  j["example_id"] = p.example_id;
  j["fold"] = p.fold;
  j["raw"] = p.raw;
  j["label"] = p.label;
  j["distance"] = p.distance;
  j["repaired"] = p.repaired;
  j["tie_broken"] = p.tie_broken;
  return j;
}

PredictionRecord prediction_from_json(const Json& j) {
  PredictionRecord p;
  try {
    p.example_id = j.at("example_id").get<std::string>();
    p.fold = j.contains("fold") && !j.at("fold").is_null() ? j.at("fold").get<int>() : -1;
    p.raw = j.at("raw").get<std::string>();
    p.label = j.at("label").get<std::string>();
    p.distance = j.at("distance").get<std::size_t>();
    p.repaired = j.at("repaired").get<bool>();
    p.tie_broken = j.at("tie_broken").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("prediction record: ") + e.what());
  }
  return p;
}

std::vector<PredictionRecord> load_predictions(const std::string& path) {
  std::vector<PredictionRecord> out;
  for (const auto& row : read_jsonl_file(path)) out.push_back(prediction_from_json(row));
  return out;
}

void save_predictions(const std::string& path, const std::vector<PredictionRecord>& records) {
  std::vector<Json> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(prediction_to_json(r));
  write_jsonl_file(path, rows);
}

}  // namespace facetag
