#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "facetag/example_builder.hpp"
#include "facetag/json.hpp"

namespace facetag {

// Lowercased tokens: runs of letters/digits (bytes >= 0x80 count as letters);
// every other non-space character is a token of its own.
std::vector<std::string> tokenize(std::string_view text);

// Multinomial naive Bayes over tokenize(input) with additive smoothing.
// Immutable after construction; safe for concurrent prediction.
class BaselineModel {
 public:
  // labelset defaults to the nine face-act labels followed by any other
  // targets in order of first appearance.
  static BaselineModel train(const std::vector<Example>& examples, double alpha = 1.0,
                             std::vector<std::string> labelset = {});

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  double alpha() const noexcept { return alpha_; }
  std::size_t vocabulary_size() const noexcept { return vocabulary_.size(); }
  std::map<std::string, std::size_t> class_counts() const;

  // Unnormalized log posterior per label; -inf for labels without training data.
  std::vector<double> log_scores(std::string_view input) const;
  std::vector<double> posterior(std::string_view input) const;
  // Canonical label string of the argmax; ties go to the higher prior, then
  // to the earlier label.
  std::string predict(std::string_view input) const;

  Json to_json() const;
  static BaselineModel from_json(const Json& j);

 private:
  void finalize();

  double alpha_ = 1.0;
  std::vector<std::string> labels_;
  std::vector<std::size_t> doc_counts_;
  // token -> per-label occurrence counts
  std::map<std::string, std::vector<std::size_t>> vocabulary_;

  std::vector<double> log_prior_;
  std::unordered_map<std::string, std::vector<double>> log_likelihood_;
};

BaselineModel load_baseline(const std::string& path);
void save_baseline(const std::string& path, const BaselineModel& model);

}  // namespace facetag
