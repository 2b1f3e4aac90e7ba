#include "facetag/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "facetag/error.hpp"

namespace facetag {

namespace {

struct RawRecord {
  std::size_t line = 0;
  std::string conversation_id;
  int turn = 0;
  std::string speaker;
  std::string text;
  std::optional<std::string> face_act;
  std::optional<std::string> dialog_act;
  std::optional<int> fold;
};

[[noreturn]] void fail_at(ErrorCode code, const std::string& source, std::size_t line,
                          const std::string& what) {
  fail(code, source + ":" + std::to_string(line) + ": " + what);
}

std::optional<int> parse_int(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

SpeakerRole resolve_speaker(const RawRecord& r, const ParseOptions& options,
                            const std::string& source) {
  if (auto it = options.role_map.find(r.speaker); it != options.role_map.end()) {
    return it->second;
  }
  if (auto role = parse_speaker(r.speaker)) return *role;
  fail_at(ErrorCode::Validation, source, r.line, "unmapped speaker '" + r.speaker + "'");
}

Corpus assemble(std::vector<RawRecord> records, const ParseOptions& options,
                const std::string& source) {
  std::optional<TagSet> tagset = options.tagset;
  std::vector<std::string> inferred_tags;
  std::set<std::string> inferred_seen;

  // Group by (conversation_id, fold) in order of first appearance.
  std::map<std::pair<std::string, int>, std::size_t> slot_of;
  std::vector<Conversation> conversations;
  std::vector<std::map<int, std::size_t>> turn_lines;
  constexpr int kNoFold = -1;

  for (auto& r : records) {
    if (r.conversation_id.empty()) {
      fail_at(ErrorCode::Validation, source, r.line, "empty conversation_id");
    }
    if (r.turn < 0) {
      fail_at(ErrorCode::Validation, source, r.line, "negative turn index");
    }
    if (r.fold) {
      if (*r.fold < 0 || (options.fold_count > 0 && *r.fold >= options.fold_count)) {
        fail_at(ErrorCode::Validation, source, r.line,
                "fold " + std::to_string(*r.fold) + " outside [0, " +
                    std::to_string(options.fold_count) + ")");
      }
    }

    Utterance u;
    u.conversation_id = r.conversation_id;
    u.turn = r.turn;
    u.speaker = resolve_speaker(r, options, source);
    u.text = std::move(r.text);
    if (r.face_act) {
      auto label = parse_face_act(*r.face_act);
      if (!label) {
        fail_at(ErrorCode::UnknownLabel, source, r.line,
                "UnknownLabel(\"" + *r.face_act + "\")");
      }
      u.face_act = *label;
    }
    if (r.dialog_act) {
      if (tagset) {
        if (!tagset->contains(*r.dialog_act)) {
          fail_at(ErrorCode::UnknownLabel, source, r.line,
                  "UnknownLabel(\"" + *r.dialog_act + "\") not in tagset '" + tagset->id() +
                      "'");
        }
        u.dialog_act = DialogActTag{*r.dialog_act, tagset->id()};
      } else {
        if (inferred_seen.insert(*r.dialog_act).second) inferred_tags.push_back(*r.dialog_act);
        u.dialog_act = DialogActTag{*r.dialog_act, "inferred"};
      }
    }

    const auto key = std::make_pair(r.conversation_id, r.fold.value_or(kNoFold));
    auto [it, inserted] = slot_of.try_emplace(key, conversations.size());
    if (inserted) {
      conversations.push_back(Conversation{r.conversation_id, r.fold, {}});
      turn_lines.emplace_back();
    }
    if (!turn_lines[it->second].emplace(u.turn, r.line).second) {
      fail_at(ErrorCode::Validation, source, r.line,
              "duplicate (conversation_id, turn) = (" + r.conversation_id + ", " +
                  std::to_string(u.turn) + ")");
    }
    conversations[it->second].utterances.push_back(std::move(u));
  }

  for (std::size_t c = 0; c < conversations.size(); ++c) {
    auto& utts = conversations[c].utterances;
    std::sort(utts.begin(), utts.end(),
              [](const Utterance& a, const Utterance& b) { return a.turn < b.turn; });
    for (std::size_t i = 0; i < utts.size(); ++i) {
      if (utts[i].turn != static_cast<int>(i)) {
        fail_at(ErrorCode::Validation, source, turn_lines[c].at(utts[i].turn),
                "non-contiguous turns in conversation '" + conversations[c].id +
                    "': expected turn " + std::to_string(i) + ", found " +
                    std::to_string(utts[i].turn));
      }
    }
  }

  if (!tagset && !inferred_tags.empty()) tagset = TagSet("inferred", inferred_tags);
  return Corpus::build(std::move(conversations), std::move(tagset), options.fold_count);
}

std::optional<std::string> optional_string(const Json& row, const char* key,
                                           const std::string& source, std::size_t line) {
  auto it = row.find(key);
  if (it == row.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    fail_at(ErrorCode::Parse, source, line, std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

std::string required_string(const Json& row, const char* key, const std::string& source,
                            std::size_t line) {
  auto value = optional_string(row, key, source, line);
  if (!value) fail_at(ErrorCode::Parse, source, line, std::string("missing field '") + key + "'");
  return *value;
}

// Delimited records with double-quote quoting; quoted fields may span lines.
std::vector<std::pair<std::size_t, std::vector<std::string>>> read_delimited(
    std::istream& in, char delimiter) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool any = false;
  std::size_t line = 1;
  std::size_t record_line = 1;
  char ch;

  auto end_record = [&] {
    fields.push_back(std::move(field));
    field.clear();
    bool blank = fields.size() == 1 && fields[0].empty();
    if (!blank) rows.emplace_back(record_line, std::move(fields));
    fields.clear();
    any = false;
  };

  while (in.get(ch)) {
    if (!any) {
      record_line = line;
      any = true;
    }
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"' && field.empty()) {
      quoted = true;
    } else if (ch == delimiter) {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch == '\n') {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      end_record();
      ++line;
    } else {
      field.push_back(ch);
    }
  }
  if (quoted) fail(ErrorCode::Parse, "line " + std::to_string(record_line) + ": unterminated quote");
  if (any) end_record();
  return rows;
}

}  // namespace

FormatSpec FormatSpec::from_json(const Json& j) {
  FormatSpec spec;
  try {
    if (j.contains("delimiter")) {
      auto d = j.at("delimiter").get<std::string>();
      if (d == "\\t" || d == "tab") d = "\t";
      if (d.size() != 1) fail(ErrorCode::Validation, "format: delimiter must be one character");
      spec.delimiter = d[0];
    }
    if (j.contains("has_header")) spec.has_header = j.at("has_header").get<bool>();
    for (const auto& [field, column] : j.at("column_map").items()) {
      spec.column_map[field] =
          column.is_number_integer() ? std::to_string(column.get<int>()) : column.get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("format spec: ") + e.what());
  }
  for (const char* required : {"conversation_id", "turn", "speaker", "text"}) {
    if (!spec.column_map.count(required)) {
      fail(ErrorCode::Validation, std::string("format spec: column_map lacks '") + required + "'");
    }
  }
  return spec;
}

Json FormatSpec::to_json() const {
  Json j;
  j["delimiter"] = std::string(1, delimiter);
  j["column_map"] = Json::object();
  for (const auto& [k, v] : column_map) j["column_map"][k] = v;
  j["has_header"] = has_header;
  return j;
}

Corpus Corpus::build(std::vector<Conversation> conversations, std::optional<TagSet> tagset,
                     int fold_count) {
  std::set<std::pair<std::string, int>> keys;
  for (const auto& c : conversations) {
    if (c.utterances.empty()) {
      fail(ErrorCode::Validation, "conversation '" + c.id + "' has no utterances");
    }
    if (c.fold && (*c.fold < 0 || (fold_count > 0 && *c.fold >= fold_count))) {
      fail(ErrorCode::Validation, "conversation '" + c.id + "': fold out of range");
    }
    if (!keys.insert({c.id, c.fold.value_or(-1)}).second) {
      fail(ErrorCode::Validation, "conversation '" + c.id + "' repeated within one fold");
    }
    for (std::size_t i = 0; i < c.utterances.size(); ++i) {
      const auto& u = c.utterances[i];
      if (u.conversation_id != c.id) {
        fail(ErrorCode::Validation, "utterance conversation_id '" + u.conversation_id +
                                        "' differs from conversation '" + c.id + "'");
      }
      if (u.turn != static_cast<int>(i)) {
        fail(ErrorCode::Validation, "conversation '" + c.id + "': turns not contiguous from 0");
      }
      if (u.dialog_act) {
        if (!tagset || !tagset->contains(u.dialog_act->name)) {
          fail(ErrorCode::UnknownLabel,
               "UnknownLabel(\"" + u.dialog_act->name + "\") not in the corpus tagset");
        }
      }
    }
  }
  Corpus corpus;
  corpus.conversations_ = std::move(conversations);
  corpus.tagset_ = std::move(tagset);
  return corpus;
}

std::vector<int> Corpus::folds_of(std::string_view id) const {
  std::vector<int> folds;
  for (const auto& c : conversations_) {
    if (c.id == id && c.fold) folds.push_back(*c.fold);
  }
  std::sort(folds.begin(), folds.end());
  return folds;
}

std::size_t Corpus::unique_conversation_count() const {
  std::set<std::string_view> ids;
  for (const auto& c : conversations_) ids.insert(c.id);
  return ids.size();
}

std::size_t Corpus::utterance_count() const noexcept {
  std::size_t n = 0;
  for (const auto& c : conversations_) n += c.utterances.size();
  return n;
}

std::size_t Corpus::labeled_count() const noexcept {
  std::size_t n = 0;
  for (const auto& c : conversations_) {
    for (const auto& u : c.utterances) n += u.face_act.has_value();
  }
  return n;
}

const Conversation* Corpus::find_conversation(std::string_view conversation_id) const {
  for (const auto& c : conversations_) {
    if (c.id == conversation_id) return &c;
  }
  return nullptr;
}

const Utterance* Corpus::find(std::string_view conversation_id, int turn) const {
  const auto* c = find_conversation(conversation_id);
  if (!c || turn < 0 || static_cast<std::size_t>(turn) >= c->utterances.size()) return nullptr;
  return &c->utterances[static_cast<std::size_t>(turn)];
}

Corpus parse_corpus_jsonl(std::istream& in, const ParseOptions& options,
                          const std::string& source) {
  std::vector<RawRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Json row;
    try {
      row = Json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail_at(ErrorCode::Parse, source, lineno, std::string("malformed line: ") + e.what());
    }
    if (!row.is_object()) fail_at(ErrorCode::Parse, source, lineno, "expected a JSON object");

    RawRecord r;
    r.line = lineno;
    r.conversation_id = required_string(row, "conversation_id", source, lineno);
    auto turn = row.find("turn");
    if (turn == row.end() || !turn->is_number_integer()) {
      fail_at(ErrorCode::Parse, source, lineno, "field 'turn' must be an integer");
    }
    r.turn = turn->get<int>();
    r.speaker = required_string(row, "speaker", source, lineno);
    r.text = required_string(row, "text", source, lineno);
    r.face_act = optional_string(row, "face_act", source, lineno);
    r.dialog_act = optional_string(row, "dialog_act", source, lineno);
    if (auto fold = row.find("fold"); fold != row.end() && !fold->is_null()) {
      if (!fold->is_number_integer()) {
        fail_at(ErrorCode::Parse, source, lineno, "field 'fold' must be an integer or null");
      }
      r.fold = fold->get<int>();
    }
    records.push_back(std::move(r));
  }
  return assemble(std::move(records), options, source);
}

Corpus parse_corpus_delimited(std::istream& in, const FormatSpec& format,
                              const ParseOptions& options, const std::string& source) {
  auto rows = read_delimited(in, format.delimiter);
  std::map<std::string, std::size_t> column_of;
  std::size_t first = 0;

  if (format.has_header) {
    if (rows.empty()) fail(ErrorCode::Parse, source + ": missing header row");
    std::map<std::string, std::size_t> header;
    for (std::size_t i = 0; i < rows[0].second.size(); ++i) header[rows[0].second[i]] = i;
    for (const auto& [field, column] : format.column_map) {
      auto it = header.find(column);
      if (it == header.end()) {
        fail(ErrorCode::Validation, source + ": header lacks column '" + column + "' for '" +
                                        field + "'");
      }
      column_of[field] = it->second;
    }
    first = 1;
  } else {
    for (const auto& [field, column] : format.column_map) {
      auto idx = parse_int(column);
      if (!idx || *idx < 0) {
        fail(ErrorCode::Validation, "format spec: column for '" + field +
                                        "' must be an index when has_header is false");
      }
      column_of[field] = static_cast<std::size_t>(*idx);
    }
  }

  std::vector<RawRecord> records;
  for (std::size_t r = first; r < rows.size(); ++r) {
    const auto& [line, fields] = rows[r];
    auto get = [&](const std::string& field) -> std::optional<std::string> {
      auto it = column_of.find(field);
      if (it == column_of.end()) return std::nullopt;
      if (it->second >= fields.size()) {
        fail_at(ErrorCode::Parse, source, line, "missing column for '" + field + "'");
      }
      return fields[it->second];
    };
    auto non_empty = [&](const std::string& field) -> std::optional<std::string> {
      auto v = get(field);
      if (v && v->empty()) return std::nullopt;
      return v;
    };

    RawRecord rec;
    rec.line = line;
    rec.conversation_id = *get("conversation_id");
    auto turn = parse_int(*get("turn"));
    if (!turn) fail_at(ErrorCode::Parse, source, line, "turn is not an integer");
    rec.turn = *turn;
    rec.speaker = *get("speaker");
    rec.text = *get("text");
    rec.face_act = non_empty("face_act");
    rec.dialog_act = non_empty("dialog_act");
    if (auto fold = non_empty("fold")) {
      auto value = parse_int(*fold);
      if (!value) fail_at(ErrorCode::Parse, source, line, "fold is not an integer");
      rec.fold = *value;
    }
    records.push_back(std::move(rec));
  }
  return assemble(std::move(records), options, source);
}

Corpus load_corpus(const std::string& path, const std::optional<FormatSpec>& format,
                   const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open corpus '" + path + "'");
  if (format) return parse_corpus_delimited(in, *format, options, path);
  return parse_corpus_jsonl(in, options, path);
}

Json utterance_to_json(const Utterance& u, std::optional<int> fold) {
  Json j;
  j["conversation_id"] = u.conversation_id;
  j["turn"] = u.turn;
  j["speaker"] = std::string(to_string(u.speaker));
  j["text"] = u.text;
  j["face_act"] = u.face_act ? Json(std::string(to_string(*u.face_act))) : Json(nullptr);
  j["dialog_act"] = u.dialog_act ? Json(u.dialog_act->name) : Json(nullptr);
  j["fold"] = fold ? Json(*fold) : Json(nullptr);
  return j;
}

void write_corpus_jsonl(std::ostream& out, const Corpus& corpus) {
  for (const auto& c : corpus.conversations()) {
    for (const auto& u : c.utterances) out << dump_line(utterance_to_json(u, c.fold)) << '\n';
  }
}

void save_corpus(const std::string& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path + "'");
  write_corpus_jsonl(out, corpus);
  if (!out) fail(ErrorCode::Io, "write failed for '" + path + "'");
}

LabelHistogram label_histogram(const Corpus& corpus) {
  LabelHistogram histogram{};
  for (const auto& c : corpus.conversations()) {
    for (const auto& u : c.utterances) {
      if (u.face_act) ++histogram[index_of(*u.face_act)];
    }
  }
  return histogram;
}

Json histogram_to_json(const LabelHistogram& histogram) {
  Json j = Json::object();
  for (auto label : kAllFaceActs) j[std::string(to_string(label))] = histogram[index_of(label)];
  return j;
}

DedupeResult dedupe_folds(const Corpus& corpus) {
  // Lowest fold per id; unassigned copies lose to any assigned one.
  std::map<std::string_view, int> keep;
  for (const auto& c : corpus.conversations()) {
    const int fold = c.fold.value_or(-1);
    auto [it, inserted] = keep.try_emplace(c.id, fold);
    if (!inserted && (it->second < 0 || (fold >= 0 && fold < it->second))) it->second = fold;
  }

  DedupeResult result;
  std::vector<Conversation> kept;
  for (const auto& c : corpus.conversations()) {
    const int fold = c.fold.value_or(-1);
    const int keep_fold = keep.at(c.id);
    if (fold == keep_fold) {
      kept.push_back(c);
    } else {
      result.removals.push_back(FoldRemoval{c.id, fold, keep_fold});
    }
  }
  std::sort(result.removals.begin(), result.removals.end(),
            [](const FoldRemoval& a, const FoldRemoval& b) {
              return std::tie(a.conversation_id, a.removed_fold) <
                     std::tie(b.conversation_id, b.removed_fold);
            });
  result.corpus = Corpus::build(std::move(kept), corpus.tagset());
  return result;
}

Json DedupeResult::report() const {
  Json j;
  j["removed"] = removals.size();
  j["removals"] = Json::array();
  for (const auto& r : removals) {
    Json item;
    item["conversation_id"] = r.conversation_id;
    item["removed_fold"] = r.removed_fold;
    item["kept_fold"] = r.kept_fold;
    j["removals"].push_back(std::move(item));
  }
  return j;
}

Json corpus_summary(const Corpus& corpus) {
  Json j;
  j["conversations"] = corpus.unique_conversation_count();
  j["conversation_entries"] = corpus.conversations().size();
  j["utterances"] = corpus.utterance_count();
  j["labeled_utterances"] = corpus.labeled_count();
  j["histogram"] = histogram_to_json(label_histogram(corpus));
  std::map<int, std::size_t> per_fold;
  for (const auto& c : corpus.conversations()) {
    if (c.fold) per_fold[*c.fold] += c.utterances.size();
  }
  j["utterances_per_fold"] = Json::object();
  for (const auto& [fold, n] : per_fold) j["utterances_per_fold"][std::to_string(fold)] = n;
  j["tagset"] = corpus.tagset() ? corpus.tagset()->to_json() : Json(nullptr);
  return j;
}

std::string example_id(std::string_view conversation_id, int turn) {
  std::string id(conversation_id);
  id += ':';
  id += std::to_string(turn);
  return id;
}

std::optional<std::pair<std::string, int>> split_example_id(std::string_view id) {
  auto pos = id.rfind(':');
  if (pos == std::string_view::npos || pos == 0) return std::nullopt;
  auto turn = parse_int(id.substr(pos + 1));
  if (!turn) return std::nullopt;
  return std::make_pair(std::string(id.substr(0, pos)), *turn);
}

}  // namespace facetag
