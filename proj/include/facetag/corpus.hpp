#pragma once

#include <array>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "facetag/json.hpp"
#include "facetag/labels.hpp"
#include "facetag/tagset.hpp"

namespace facetag {

struct DialogActTag {
  std::string name;
  std::string tagset_id;

  bool operator==(const DialogActTag&) const = default;
};

struct Utterance {
  std::string conversation_id;
  int turn = 0;
  SpeakerRole speaker = SpeakerRole::Persuader;
  std::string text;
  std::optional<FaceActLabel> face_act;
  std::optional<DialogActTag> dialog_act;

  bool operator==(const Utterance&) const = default;
};

// One conversation as it appears in one fold. A conversation duplicated
// across folds is held as several Conversation entries sharing an id until
// dedupe_folds() removes the extra copies.
struct Conversation {
  std::string id;
  std::optional<int> fold;
  std::vector<Utterance> utterances;

  bool operator==(const Conversation&) const = default;
};

// Column mapping for the delimited-text importer. column_map maps a field
// name (conversation_id, turn, speaker, text, face_act, dialog_act, fold) to
// a header name, or to a 0-based column index when has_header is false.
struct FormatSpec {
  char delimiter = '\t';
  std::map<std::string, std::string> column_map;
  bool has_header = true;

  static FormatSpec from_json(const Json& j);
  Json to_json() const;
};

struct ParseOptions {
  // Dialog-act tags are validated against this tagset when present;
  // otherwise the tagset is inferred from the tags seen, in order.
  std::optional<TagSet> tagset;
  // Extra speaker strings accepted besides ER/EE.
  std::map<std::string, SpeakerRole> role_map;
  // Folds must lie in [0, fold_count); 0 disables the check.
  int fold_count = 5;
};

// Immutable once built.
class Corpus {
 public:
  Corpus() = default;

  // Validates invariants: non-empty conversations, matching ids, contiguous
  // turns from 0, unique (id, fold) pairs, dialog acts in the tagset.
  static Corpus build(std::vector<Conversation> conversations,
                      std::optional<TagSet> tagset = std::nullopt, int fold_count = 0);

  const std::vector<Conversation>& conversations() const noexcept { return conversations_; }
  const std::optional<TagSet>& tagset() const noexcept { return tagset_; }

  // Folds in which a conversation id appears, ascending.
  std::vector<int> folds_of(std::string_view id) const;
  std::size_t unique_conversation_count() const;
  std::size_t utterance_count() const noexcept;
  std::size_t labeled_count() const noexcept;
  bool empty() const noexcept { return conversations_.empty(); }

  // Looks up an utterance by conversation id and turn (first copy wins).
  const Utterance* find(std::string_view conversation_id, int turn) const;
  const Conversation* find_conversation(std::string_view conversation_id) const;

  bool operator==(const Corpus&) const = default;

 private:
  std::vector<Conversation> conversations_;
  std::optional<TagSet> tagset_;
};

Corpus parse_corpus_jsonl(std::istream& in, const ParseOptions& options = {},
                          const std::string& source = "<input>");
Corpus parse_corpus_delimited(std::istream& in, const FormatSpec& format,
                              const ParseOptions& options = {},
                              const std::string& source = "<input>");
Corpus load_corpus(const std::string& path, const std::optional<FormatSpec>& format,
                   const ParseOptions& options = {});

// Canonical form: conversations in corpus order, utterances by turn, one
// object per line with a fixed key order.
void write_corpus_jsonl(std::ostream& out, const Corpus& corpus);
void save_corpus(const std::string& path, const Corpus& corpus);
Json utterance_to_json(const Utterance& u, std::optional<int> fold);

using LabelHistogram = std::array<std::size_t, kFaceActCount>;

LabelHistogram label_histogram(const Corpus& corpus);
Json histogram_to_json(const LabelHistogram& histogram);

struct FoldRemoval {
  std::string conversation_id;
  int removed_fold = 0;
  int kept_fold = 0;
};

struct DedupeResult {
  Corpus corpus;
  std::vector<FoldRemoval> removals;

  Json report() const;
};

// Keeps each conversation only in the lowest-numbered fold it appears in.
DedupeResult dedupe_folds(const Corpus& corpus);

Json corpus_summary(const Corpus& corpus);

// "<conversation_id>:<turn>"
std::string example_id(std::string_view conversation_id, int turn);
// Splits an example id at its last ':'; nullopt when malformed.
std::optional<std::pair<std::string, int>> split_example_id(std::string_view id);

}  // namespace facetag
