#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "facetag/corpus.hpp"
#include "facetag/json.hpp"
#include "facetag/metrics.hpp"
#include "facetag/repair.hpp"
#include "facetag/stats.hpp"

namespace facetag {

struct AlignedPrediction {
  std::string example_id;
  int fold = -1;
  std::string gold;
  std::string predicted;
  const Utterance* utterance = nullptr;
};

struct Alignment {
  std::vector<AlignedPrediction> items;
  // "<example_id>@<fold>" for predictions dropped because the same example
  // was already scored in a lower fold.
  std::vector<std::string> dropped;
};

// Looks up the gold label of every prediction in corpus (face act for the
// face-act task, dialog-act tag otherwise). An example predicted in several
// folds is kept in the lowest one; a repeat within one fold, an unknown
// utterance or a missing gold label is an Error(Validation).
Alignment align_predictions(const std::vector<PredictionRecord>& predictions, const Corpus& corpus,
                            std::string_view task);

std::vector<std::string> task_labelset(const Corpus& corpus, std::string_view task);

struct Evaluation {
  std::string task;
  std::vector<std::string> labelset;
  std::vector<int> folds;
  std::vector<MetricsReport> per_fold;
  MetricsReport average;
  std::vector<std::string> dropped;

  Json to_json() const;
  static Evaluation from_json(const Json& j);
};

// Scores each fold separately and averages the fold reports. Predictions
// without a fold form a single group.
Evaluation evaluate(const Alignment& alignment, const std::vector<std::string>& labelset,
                    std::string_view task, const std::set<std::string>& excluded);

ConfusionMatrix pooled_confusion(const Alignment& alignment,
                                 const std::vector<std::string>& labelset);

enum class CompareMetric { Precision, Recall, F1 };
enum class CompareLevel { Label, Aggregate, AcrossLabels };

std::string_view to_string(CompareMetric m) noexcept;
std::string_view to_string(CompareLevel l) noexcept;
std::optional<CompareMetric> parse_compare_metric(std::string_view text) noexcept;
std::optional<CompareLevel> parse_compare_level(std::string_view text) noexcept;

struct ComparisonRow {
  std::string name;                 // label, or the aggregate name
  std::vector<std::string> blocks;  // fold numbers or labels
  std::vector<std::vector<double>> values;
  FriedmanResult result;
};

struct Comparison {
  CompareMetric metric = CompareMetric::F1;
  CompareLevel level = CompareLevel::Label;
  std::string aggregate;
  std::vector<std::string> systems;
  std::vector<ComparisonRow> rows;

  Json to_json() const;
  std::string render() const;
};

struct CompareOptions {
  CompareMetric metric = CompareMetric::F1;
  CompareLevel level = CompareLevel::Label;
  // "macro" or "micro"; used by the aggregate level.
  std::string aggregate = "macro";
  // Labels left out of the label and across-labels levels.
  std::set<std::string> excluded = kDefaultMacroExclusions;
  FriedmanOptions friedman;
};

// Treatments are the systems. Label level: one test per label with folds as
// blocks. Aggregate level: one test on the per-fold macro (or micro) metric.
// Across-labels level: one test with the fold-averaged per-label metric of
// every supported label as blocks.
Comparison compare_systems(const std::vector<std::string>& names,
                           const std::vector<Evaluation>& systems, const CompareOptions& options);

}  // namespace facetag
