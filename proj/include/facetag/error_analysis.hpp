#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "facetag/example_builder.hpp"
#include "facetag/json.hpp"
#include "facetag/repair.hpp"
#include "facetag/tagset.hpp"

namespace facetag {

enum class ErrorCategory {
  BothHappeningSamePart,
  BothHappeningDiffPart,
  GoldErrorCorrect,
  GoldErrorIncorrect,
  TrueForPrevious,
  PredictedOther,
  NoIdea,
};

inline constexpr std::size_t kErrorCategoryCount = 7;
inline constexpr std::array<ErrorCategory, kErrorCategoryCount> kAllErrorCategories = {
    ErrorCategory::BothHappeningSamePart, ErrorCategory::BothHappeningDiffPart,
    ErrorCategory::GoldErrorCorrect,      ErrorCategory::GoldErrorIncorrect,
    ErrorCategory::TrueForPrevious,       ErrorCategory::PredictedOther,
    ErrorCategory::NoIdea,
};

std::string_view to_string(ErrorCategory c) noexcept;
// Human-readable heading, e.g. "Both Happening (Same Part)".
std::string_view display_name(ErrorCategory c) noexcept;
// Ignores case, spaces and punctuation, so "both happening (same part)" and
// "BothHappeningSamePart" both parse.
std::optional<ErrorCategory> parse_error_category(std::string_view text) noexcept;

// A prediction joined with its gold label and rendered input.
struct ScoredItem {
  std::string example_id;
  int fold = -1;
  std::string context;  // preceding turns, '\n'-separated; may be empty
  std::string text;     // rendered target turn
  std::string gold;
  std::string predicted;
};

// Joins predictions to examples by id. Examples of the dialog-act task are
// skipped; a prediction without an example, or a face-act example without a
// prediction, is an Error(Validation).
std::vector<ScoredItem> join_scored(const std::vector<Example>& examples,
                                    const std::vector<PredictionRecord>& predictions);

struct ErrorSample {
  std::string example_id;
  std::string conversation_id;
  int turn = 0;
  int fold = -1;
  std::string context;
  std::string text;
  std::string gold;
  std::string predicted;
  std::optional<ErrorCategory> category;

  bool operator==(const ErrorSample&) const = default;
};

struct SamplingPlan {
  std::size_t per_fold = 5;
  std::size_t cap = 25;
  std::uint64_t seed = 0;
};

// For each gold label in labelset order and each fold in ascending order,
// draws up to per_fold misclassified items without replacement, stopping a
// label at cap samples. Draws depend only on the seed and example ids.
std::vector<ErrorSample> sample_errors(const std::vector<ScoredItem>& items,
                                       const std::vector<std::string>& labelset,
                                       const SamplingPlan& plan = {});

// TSV with header example_id, conversation_id, turn, fold, context, text,
// gold, predicted, category. Tabs, newlines and backslashes inside fields
// are escaped as \t, \n and \\.
void write_annotation_sheet(std::ostream& out, const std::vector<ErrorSample>& samples);
void save_annotation_sheet(const std::string& path, const std::vector<ErrorSample>& samples);

// Columns are found by header name. With require_category, a blank or
// unknown category is an Error(Validation) naming the row.
std::vector<ErrorSample> read_annotation_sheet(std::istream& in, bool require_category,
                                               const std::string& source = "<sheet>");
std::vector<ErrorSample> load_annotation_sheet(const std::string& path, bool require_category);

struct ErrorTally {
  std::vector<std::string> labels;  // gold labels, in first-seen order of labelset
  std::vector<std::array<std::size_t, kErrorCategoryCount>> counts;
  std::vector<std::size_t> row_totals;
  std::array<std::size_t, kErrorCategoryCount> column_totals{};
  std::size_t total = 0;
  double gold_error_rate = 0.0;
  double prediction_correct_rate = 0.0;

  std::size_t at(std::string_view label, ErrorCategory c) const;
  Json to_json() const;
  std::string render() const;
};

// Rows follow labelset order; labels absent from the sheet are omitted.
// Gold labels outside labelset are appended in first-seen order.
ErrorTally tally_errors(const std::vector<ErrorSample>& annotated,
                        const std::vector<std::string>& labelset = {});

enum class OutcomeCell { TP, FP, TN, FN };

std::string_view to_string(OutcomeCell c) noexcept;

OutcomeCell outcome(std::string_view gold, std::string_view predicted,
                    std::string_view target) noexcept;

struct TagDistribution {
  std::size_t count = 0;                       // utterances in this group
  std::map<std::string, std::size_t> tags;     // collapsed tag -> count
  std::size_t covered = 0;                     // utterances whose tag is in the subset
  std::map<std::string, double> percent;       // subset tag -> share of covered

  Json to_json(const std::vector<std::string>& order) const;
};

struct ShiftCell {
  OutcomeCell from = OutcomeCell::FN;
  OutcomeCell to = OutcomeCell::TP;
  TagDistribution distribution;
};

struct ShiftReport {
  std::string target;
  std::vector<std::string> subset;  // empty: no restriction
  std::size_t total = 0;
  std::size_t unchanged = 0;
  // Other changes between two of TP/FP/TN/FN cannot occur for one target
  // (gold fixes the row), so four cells cover every changed utterance.
  std::vector<ShiftCell> cells;  // FN->TP, TP->FN, FP->TN, TN->FP
  TagDistribution overall;
  TagDistribution target_gold;

  const ShiftCell& cell(OutcomeCell from, OutcomeCell to) const;
  Json to_json() const;
  std::string render() const;
};

struct ShiftOptions {
  std::string target;
  // Collapsed tags whose shares are reported; empty keeps every tag.
  std::vector<std::string> subset = {"Statement", "Question"};
  std::map<std::string, std::string> collapse_map = {{"Disruption", "Statement"}};
};

ShiftReport shift_analysis(const std::vector<std::string>& gold,
                           const std::vector<std::string>& predictions_a,
                           const std::vector<std::string>& predictions_b,
                           const std::vector<std::string>& da_tags, const ShiftOptions& options);

}  // namespace facetag
