#include "facetag/error_analysis.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "facetag/corpus.hpp"
#include "facetag/error.hpp"
#include "facetag/keyed_order.hpp"

namespace facetag {

namespace {

struct CategoryNames {
  ErrorCategory category;
  std::string_view id;
  std::string_view display;
};

constexpr std::array<CategoryNames, kErrorCategoryCount> kCategoryNames = {{
    {ErrorCategory::BothHappeningSamePart, "BothHappeningSamePart", "Both Happening (Same Part)"},
    {ErrorCategory::BothHappeningDiffPart, "BothHappeningDiffPart", "Both Happening (Diff. Part)"},
    {ErrorCategory::GoldErrorCorrect, "GoldErrorCorrect", "Gold Error (Correct)"},
    {ErrorCategory::GoldErrorIncorrect, "GoldErrorIncorrect", "Gold Error (Incorrect)"},
    {ErrorCategory::TrueForPrevious, "TrueForPrevious", "True for Previous"},
    {ErrorCategory::PredictedOther, "PredictedOther", "Predicted Other"},
    {ErrorCategory::NoIdea, "NoIdea", "No Idea"},
}};

std::string squash(std::string_view text) {
  std::string out;
  for (unsigned char c : text) {
    if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  for (;;) {
    const auto nl = text.find('\n', start);
    lines.emplace_back(text.substr(start, nl == std::string_view::npos ? nl : nl - start));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return lines;
}

std::string escape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out.push_back(s[i]);
      continue;
    }
    switch (s[++i]) {
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      case '\\': out.push_back('\\'); break;
      default:
        out.push_back('\\');
        out.push_back(s[i]);
    }
  }
  return out;
}

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    fields.emplace_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.0f%%", v * 100.0);
  return buf;
}

std::string pad(std::string s, std::size_t width, bool right = false) {
  if (s.size() >= width) return s;
  return right ? std::string(width - s.size(), ' ') + s : s + std::string(width - s.size(), ' ');
}

TagDistribution distribution_of(const std::vector<std::size_t>& rows,
                                const std::vector<std::string>& tags,
                                const std::vector<std::string>& subset) {
  TagDistribution d;
  d.count = rows.size();
  for (auto i : rows) ++d.tags[tags[i]];
  if (subset.empty()) {
    d.covered = d.count;
    for (const auto& [tag, n] : d.tags) {
      d.percent[tag] = static_cast<double>(n) / static_cast<double>(d.count);
    }
    return d;
  }
  for (const auto& tag : subset) {
    auto it = d.tags.find(tag);
    d.covered += it == d.tags.end() ? 0 : it->second;
  }
  for (const auto& tag : subset) {
    auto it = d.tags.find(tag);
    const std::size_t n = it == d.tags.end() ? 0 : it->second;
    d.percent[tag] = d.covered == 0 ? 0.0 : static_cast<double>(n) / static_cast<double>(d.covered);
  }
  return d;
}

}  // namespace

std::string_view to_string(ErrorCategory c) noexcept {
  return kCategoryNames[static_cast<std::size_t>(c)].id;
}

std::string_view display_name(ErrorCategory c) noexcept {
  return kCategoryNames[static_cast<std::size_t>(c)].display;
}

std::optional<ErrorCategory> parse_error_category(std::string_view text) noexcept {
  const auto key = squash(text);
  if (key.empty()) return std::nullopt;
  for (const auto& names : kCategoryNames) {
    if (key == squash(names.id) || key == squash(names.display)) return names.category;
  }
  return std::nullopt;
}

std::vector<ScoredItem> join_scored(const std::vector<Example>& examples,
                                    const std::vector<PredictionRecord>& predictions) {
  std::unordered_map<std::string, const PredictionRecord*> by_id;
  for (const auto& p : predictions) {
    if (!by_id.emplace(p.example_id, &p).second) {
      fail(ErrorCode::Validation, "duplicate prediction for " + p.example_id);
    }
  }
  std::vector<ScoredItem> items;
  std::size_t matched = 0;
  for (const auto& e : examples) {
    if (task_of(e.variant) != kFaceActTask) {
      if (by_id.count(e.id)) ++matched;
      continue;
    }
    auto it = by_id.find(e.id);
    if (it == by_id.end()) fail(ErrorCode::Validation, "no prediction for example " + e.id);
    ++matched;
    auto lines = split_lines(e.input);
    if (!lines.empty() && (lines.front() == std::string(kFaceActTask) + ":" ||
                           lines.front() == std::string(kDialogActTask) + ":")) {
      lines.erase(lines.begin());
    }
    ScoredItem item;
    item.example_id = e.id;
    item.fold = e.fold;
    item.text = lines.empty() ? std::string() : lines.back();
    for (std::size_t i = 0; i + 1 < lines.size(); ++i) {
      if (i) item.context += '\n';
      item.context += lines[i];
    }
    item.gold = e.target;
    item.predicted = it->second->label;
    items.push_back(std::move(item));
  }
  if (matched != predictions.size()) {
    std::set<std::string> ids;
    for (const auto& e : examples) ids.insert(e.id);
    for (const auto& p : predictions) {
      if (!ids.count(p.example_id)) {
        fail(ErrorCode::Validation, "prediction " + p.example_id + " has no matching example");
      }
    }
  }
  return items;
}

std::vector<ErrorSample> sample_errors(const std::vector<ScoredItem>& items,
                                       const std::vector<std::string>& labelset,
                                       const SamplingPlan& plan) {
  std::set<int> folds;
  for (const auto& item : items) folds.insert(item.fold);

  std::vector<ErrorSample> out;
  for (const auto& label : labelset) {
    std::size_t taken = 0;
    for (int fold : folds) {
      if (taken >= plan.cap) break;
      std::vector<std::pair<std::uint64_t, const ScoredItem*>> pool;
      for (const auto& item : items) {
        if (item.fold != fold || item.gold != label || item.predicted == item.gold) continue;
        const auto name = label + '\x1f' + std::to_string(fold) + '\x1f' + item.example_id;
        pool.emplace_back(order_key(plan.seed, name), &item);
      }
      std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) {
        return std::tie(a.first, a.second->example_id) < std::tie(b.first, b.second->example_id);
      });
      const std::size_t n = std::min({plan.per_fold, plan.cap - taken, pool.size()});
      for (std::size_t i = 0; i < n; ++i) {
        const auto& item = *pool[i].second;
        ErrorSample s;
        s.example_id = item.example_id;
        if (auto parts = split_example_id(item.example_id)) {
          s.conversation_id = parts->first;
          s.turn = parts->second;
        } else {
          s.conversation_id = item.example_id;
        }
        s.fold = item.fold;
        s.context = item.context;
        s.text = item.text;
        s.gold = item.gold;
        s.predicted = item.predicted;
        out.push_back(std::move(s));
      }
      taken += n;
    }
  }
  return out;
}

void write_annotation_sheet(std::ostream& out, const std::vector<ErrorSample>& samples) {
  out << "example_id\tconversation_id\tturn\tfold\tcontext\ttext\tgold\tpredicted\tcategory\n";
  for (const auto& s : samples) {
    out << escape_field(s.example_id) << '\t' << escape_field(s.conversation_id) << '\t' << s.turn
        << '\t' << s.fold << '\t' << escape_field(s.context) << '\t' << escape_field(s.text)
        << '\t' << escape_field(s.gold) << '\t' << escape_field(s.predicted) << '\t'
        << (s.category ? to_string(*s.category) : std::string_view{}) << '\n';
  }
}

void save_annotation_sheet(const std::string& path, const std::vector<ErrorSample>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path);
  write_annotation_sheet(out, samples);
  if (!out) fail(ErrorCode::Io, "write failed: " + path);
}

std::vector<ErrorSample> read_annotation_sheet(std::istream& in, bool require_category,
                                               const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  if (!next()) fail(ErrorCode::Parse, source + ": empty annotation sheet");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  std::map<std::string, std::size_t> column;
  const auto header = split_tabs(line);
  for (std::size_t i = 0; i < header.size(); ++i) column.emplace(squash(header[i]), i);
  auto col = [&](std::string_view name) -> std::optional<std::size_t> {
    auto it = column.find(squash(name));
    if (it == column.end()) return std::nullopt;
    return it->second;
  };
  for (std::string_view required : {"example_id", "gold", "predicted", "category"}) {
    if (!col(required)) {
      fail(ErrorCode::Parse, source + ":1: missing column '" + std::string(required) + "'");
    }
  }

  std::vector<ErrorSample> samples;
  std::size_t row = 0;
  while (next()) {
    if (line.empty()) continue;
    ++row;
    const auto fields = split_tabs(line);
    auto get = [&](std::string_view name) -> std::string {
      auto c = col(name);
      if (!c || *c >= fields.size()) return {};
      return unescape_field(fields[*c]);
    };
    auto where = [&] {
      return source + ":" + std::to_string(line_no) + ": row " + std::to_string(row);
    };
    auto parse_int = [&](std::string_view name, int fallback) {
      const auto text = get(name);
      if (text.empty()) return fallback;
      try {
        std::size_t used = 0;
        const int v = std::stoi(text, &used);
        if (used == text.size()) return v;
      } catch (const std::exception&) {
      }
      fail(ErrorCode::Parse, where() + ": bad " + std::string(name) + " '" + text + "'");
    };

    ErrorSample s;
    s.example_id = get("example_id");
    if (s.example_id.empty()) fail(ErrorCode::Parse, where() + ": empty example_id");
    s.conversation_id = get("conversation_id");
    int default_turn = 0;
    if (auto parts = split_example_id(s.example_id)) {
      if (s.conversation_id.empty()) s.conversation_id = parts->first;
      default_turn = parts->second;
    }
    s.turn = parse_int("turn", default_turn);
    s.fold = parse_int("fold", -1);
    s.context = get("context");
    s.text = get("text");
    s.gold = get("gold");
    s.predicted = get("predicted");
    const auto category = get("category");
    if (auto c = parse_error_category(category)) {
      s.category = c;
    } else if (!category.empty()) {
      fail(ErrorCode::Validation, where() + " (" + s.example_id + "): unknown category '" +
                                      category + "'");
    } else if (require_category) {
      fail(ErrorCode::Validation, where() + " (" + s.example_id + "): missing category");
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

std::vector<ErrorSample> load_annotation_sheet(const std::string& path, bool require_category) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  return read_annotation_sheet(in, require_category, path);
}

std::size_t ErrorTally::at(std::string_view label, ErrorCategory c) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return counts[i][static_cast<std::size_t>(c)];
  }
  return 0;
}

ErrorTally tally_errors(const std::vector<ErrorSample>& annotated,
                        const std::vector<std::string>& labelset) {
  std::vector<std::string> order;
  for (const auto& l : labelset) {
    for (const auto& s : annotated) {
      if (s.gold == l) {
        order.push_back(l);
        break;
      }
    }
  }
  for (const auto& s : annotated) {
    if (std::find(order.begin(), order.end(), s.gold) == order.end()) order.push_back(s.gold);
  }

  ErrorTally t;
  t.labels = order;
  t.counts.assign(order.size(), {});
  t.row_totals.assign(order.size(), 0);
  std::size_t row = 0;
  for (const auto& s : annotated) {
    ++row;
    if (!s.category) {
      fail(ErrorCode::Validation,
           "row " + std::to_string(row) + " (" + s.example_id + "): missing category");
    }
    const auto li = static_cast<std::size_t>(
        std::find(order.begin(), order.end(), s.gold) - order.begin());
    const auto ci = static_cast<std::size_t>(*s.category);
    ++t.counts[li][ci];
    ++t.row_totals[li];
    ++t.column_totals[ci];
    ++t.total;
  }
  if (t.total > 0) {
    auto col = [&](ErrorCategory c) {
      return static_cast<double>(t.column_totals[static_cast<std::size_t>(c)]);
    };
    const double n = static_cast<double>(t.total);
    t.gold_error_rate = (col(ErrorCategory::GoldErrorCorrect) +
                         col(ErrorCategory::GoldErrorIncorrect)) / n;
    t.prediction_correct_rate = (col(ErrorCategory::BothHappeningSamePart) +
                                 col(ErrorCategory::BothHappeningDiffPart) +
                                 col(ErrorCategory::GoldErrorCorrect)) / n;
  }
  return t;
}

Json ErrorTally::to_json() const {
  Json j;
  j["categories"] = Json::array();
  for (auto c : kAllErrorCategories) j["categories"].push_back(std::string(to_string(c)));
  j["rows"] = Json::array();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Json r;
    r["gold"] = labels[i];
    r["counts"] = Json::object();
    for (auto c : kAllErrorCategories) {
      r["counts"][std::string(to_string(c))] = counts[i][static_cast<std::size_t>(c)];
    }
    r["total"] = row_totals[i];
    j["rows"].push_back(std::move(r));
  }
  j["column_totals"] = Json::object();
  for (auto c : kAllErrorCategories) {
    j["column_totals"][std::string(to_string(c))] = column_totals[static_cast<std::size_t>(c)];
  }
  j["total"] = total;
  j["gold_error_rate"] = gold_error_rate;
  j["prediction_correct_rate"] = prediction_correct_rate;
  return j;
}

std::string ErrorTally::render() const {
  static constexpr std::array<std::string_view, kErrorCategoryCount> kShort = {
      "Same", "Diff", "GoldOK", "GoldBad", "Prev", "Other", "NoIdea"};
  std::ostringstream out;
  out << pad("gold", 8);
  for (auto h : kShort) out << pad(std::string(h), 8, true);
  out << pad("total", 8, true) << '\n';
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << pad(labels[i], 8);
    for (auto n : counts[i]) out << pad(std::to_string(n), 8, true);
    out << pad(std::to_string(row_totals[i]), 8, true) << '\n';
  }
  out << pad("total", 8);
  for (auto n : column_totals) out << pad(std::to_string(n), 8, true);
  out << pad(std::to_string(total), 8, true) << '\n';
  char buf[128];
  std::snprintf(buf, sizeof buf, "gold error rate %.1f%%, prediction actually correct %.1f%%\n",
                gold_error_rate * 100.0, prediction_correct_rate * 100.0);
  out << buf;
  return out.str();
}

std::string_view to_string(OutcomeCell c) noexcept {
  switch (c) {
    case OutcomeCell::TP: return "TP";
    case OutcomeCell::FP: return "FP";
    case OutcomeCell::TN: return "TN";
    case OutcomeCell::FN: return "FN";
  }
  return "TN";
}

OutcomeCell outcome(std::string_view gold, std::string_view predicted,
                    std::string_view target) noexcept {
  if (gold == target) return predicted == target ? OutcomeCell::TP : OutcomeCell::FN;
  return predicted == target ? OutcomeCell::FP : OutcomeCell::TN;
}

Json TagDistribution::to_json(const std::vector<std::string>& order) const {
  Json j;
  j["count"] = count;
  j["covered"] = covered;
  j["tags"] = Json::object();
  for (const auto& [tag, n] : tags) j["tags"][tag] = n;
  j["percent"] = Json::object();
  if (order.empty()) {
    for (const auto& [tag, p] : percent) j["percent"][tag] = p;
  } else {
    for (const auto& tag : order) j["percent"][tag] = percent.at(tag);
  }
  return j;
}

const ShiftCell& ShiftReport::cell(OutcomeCell from, OutcomeCell to) const {
  for (const auto& c : cells) {
    if (c.from == from && c.to == to) return c;
  }
  fail(ErrorCode::InvalidArgument, "no shift cell " + std::string(to_string(from)) + "->" +
                                       std::string(to_string(to)));
}

ShiftReport shift_analysis(const std::vector<std::string>& gold,
                           const std::vector<std::string>& predictions_a,
                           const std::vector<std::string>& predictions_b,
                           const std::vector<std::string>& da_tags, const ShiftOptions& options) {
  const std::size_t n = gold.size();
  if (predictions_a.size() != n || predictions_b.size() != n || da_tags.size() != n) {
    fail(ErrorCode::Validation, "shift analysis needs aligned vectors (gold " + std::to_string(n) +
                                    ", A " + std::to_string(predictions_a.size()) + ", B " +
                                    std::to_string(predictions_b.size()) + ", tags " +
                                    std::to_string(da_tags.size()) + ")");
  }
  if (options.target.empty()) fail(ErrorCode::InvalidArgument, "shift analysis needs a target");

  std::vector<std::string> tags(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = options.collapse_map.find(da_tags[i]);
    tags[i] = it == options.collapse_map.end() ? da_tags[i] : it->second;
  }

  static constexpr std::array<std::pair<OutcomeCell, OutcomeCell>, 4> kShifts = {{
      {OutcomeCell::FN, OutcomeCell::TP},
      {OutcomeCell::TP, OutcomeCell::FN},
      {OutcomeCell::FP, OutcomeCell::TN},
      {OutcomeCell::TN, OutcomeCell::FP},
  }};
  std::array<std::vector<std::size_t>, 4> members;
  std::vector<std::size_t> all(n);
  std::vector<std::size_t> target_gold;
  ShiftReport r;
  r.target = options.target;
  r.subset = options.subset;
  r.total = n;
  for (std::size_t i = 0; i < n; ++i) {
    all[i] = i;
    if (gold[i] == options.target) target_gold.push_back(i);
    const auto a = outcome(gold[i], predictions_a[i], options.target);
    const auto b = outcome(gold[i], predictions_b[i], options.target);
    if (a == b) {
      ++r.unchanged;
      continue;
    }
    for (std::size_t s = 0; s < kShifts.size(); ++s) {
      if (kShifts[s].first == a && kShifts[s].second == b) members[s].push_back(i);
    }
  }
  for (std::size_t s = 0; s < kShifts.size(); ++s) {
    r.cells.push_back(ShiftCell{kShifts[s].first, kShifts[s].second,
                                distribution_of(members[s], tags, options.subset)});
  }
  r.overall = distribution_of(all, tags, options.subset);
  r.target_gold = distribution_of(target_gold, tags, options.subset);
  return r;
}

Json ShiftReport::to_json() const {
  Json j;
  j["target"] = target;
  j["subset"] = subset;
  j["total"] = total;
  j["unchanged"] = unchanged;
  j["overall"] = overall.to_json(subset);
  j["target_gold"] = target_gold.to_json(subset);
  j["cells"] = Json::array();
  for (const auto& c : cells) {
    Json cell;
    cell["from"] = std::string(to_string(c.from));
    cell["to"] = std::string(to_string(c.to));
    cell["count"] = c.distribution.count;
    cell["distribution"] = c.distribution.to_json(subset);
    j["cells"].push_back(std::move(cell));
  }
  return j;
}

std::string ShiftReport::render() const {
  std::vector<std::string> rows = subset;
  if (rows.empty()) {
    std::set<std::string> seen;
    for (const auto& [tag, n] : overall.tags) seen.insert(tag);
    rows.assign(seen.begin(), seen.end());
  }
  std::vector<std::pair<std::string, const TagDistribution*>> columns = {
      {"All", &overall}, {target, &target_gold}};
  for (const auto& c : cells) {
    columns.emplace_back(std::string(to_string(c.from)) + " to " + std::string(to_string(c.to)),
                         &c.distribution);
  }
  std::size_t width = 10;
  for (const auto& row : rows) width = std::max(width, row.size() + 2);
  std::ostringstream out;
  out << pad("", width);
  for (const auto& [name, d] : columns) out << pad(name, 10, true);
  out << '\n';
  for (const auto& row : rows) {
    out << pad(row, width);
    for (const auto& [name, d] : columns) {
      auto it = d->percent.find(row);
      out << pad(it == d->percent.end() ? "0%" : percent(it->second), 10, true);
    }
    out << '\n';
  }
  out << pad("Count", width) << pad("-", 10, true);
  for (std::size_t c = 1; c < columns.size(); ++c) {
    out << pad(std::to_string(columns[c].second->count), 10, true);
  }
  out << '\n';
  return out.str();
}

}  // namespace facetag
