#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "facetag/json.hpp"

namespace facetag {

// Counts indexed (gold, predicted) over an ordered labelset.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::vector<std::string> labelset);

  // Throws Error(UnknownLabel) for labels outside the labelset.
  void add(std::string_view gold, std::string_view predicted, std::size_t times = 1);

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t at(std::size_t gold, std::size_t predicted) const {
    return counts_[gold * labels_.size() + predicted];
  }
  std::size_t row_sum(std::size_t gold) const;
  std::size_t col_sum(std::size_t predicted) const;
  std::size_t trace() const;
  std::size_t total() const noexcept { return total_; }
  std::size_t index(std::string_view label) const;

  Json to_json() const;

 private:
  std::vector<std::string> labels_;
  std::vector<std::size_t> counts_;
  std::size_t total_ = 0;
};

ConfusionMatrix confusion(const std::vector<std::pair<std::string, std::string>>& pairs,
                          const std::vector<std::string>& labelset);

// Rows with support sum to 1; rows without support are all zero.
std::vector<std::vector<double>> row_normalize(const ConfusionMatrix& cm);

// 2PR/(P+R), 0 when P+R = 0.
double f1_score(double precision, double recall) noexcept;

struct PerLabelMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  std::size_t predicted = 0;
};

struct AggregateMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  std::vector<PerLabelMetrics> per_label;
  AggregateMetrics micro;
  // Unweighted mean over labels with gold support.
  AggregateMetrics macro;
  // Macro recomputed without each excluded label.
  std::map<std::string, AggregateMetrics> macro_excluding;
  std::vector<std::string> macro_labels;
  std::size_t n = 0;
  std::size_t folds = 1;

  const PerLabelMetrics* find(std::string_view label) const;
  Json to_json() const;
  static MetricsReport from_json(const Json& j);
};

inline const std::set<std::string> kDefaultMacroExclusions = {"spos-"};

MetricsReport report(const ConfusionMatrix& cm,
                     const std::set<std::string>& excluded = kDefaultMacroExclusions);

// Unweighted mean of every metric across folds; supports and n are summed.
MetricsReport average_folds(const std::vector<MetricsReport>& reports);

std::string render_report_table(const MetricsReport& r);
std::string render_confusion_table(const ConfusionMatrix& cm, bool normalized);

}  // namespace facetag
