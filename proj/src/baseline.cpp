#include "facetag/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "facetag/error.hpp"
#include "facetag/labels.hpp"

namespace facetag {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) tokens.push_back(std::move(word));
    word.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      word.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
    } else {
      flush();
      if (!is_space(c)) tokens.emplace_back(1, ch);
    }
  }
  flush();
  return tokens;
}

BaselineModel BaselineModel::train(const std::vector<Example>& examples, double alpha,
                                   std::vector<std::string> labelset) {
  if (examples.empty()) fail(ErrorCode::InvalidArgument, "train_baseline: no examples");
  if (!(alpha > 0.0)) fail(ErrorCode::InvalidArgument, "train_baseline: alpha must be > 0");

  if (labelset.empty()) {
    labelset = face_act_labelset();
    std::set<std::string> seen(labelset.begin(), labelset.end());
    for (const auto& e : examples) {
      if (seen.insert(e.target).second) labelset.push_back(e.target);
    }
  }
  std::unordered_map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < labelset.size(); ++i) slot.emplace(labelset[i], i);

  BaselineModel model;
  model.alpha_ = alpha;
  model.labels_ = std::move(labelset);
  model.doc_counts_.assign(model.labels_.size(), 0);

  for (const auto& e : examples) {
    auto it = slot.find(e.target);
    if (it == slot.end()) {
      fail(ErrorCode::UnknownLabel, "train_baseline: target '" + e.target + "' of " + e.id +
                                        " not in the labelset");
    }
    const std::size_t c = it->second;
    ++model.doc_counts_[c];
    for (auto& tok : tokenize(e.input)) {
      auto& counts = model.vocabulary_[std::move(tok)];
      if (counts.empty()) counts.assign(model.labels_.size(), 0);
      ++counts[c];
    }
  }
  if (model.vocabulary_.empty()) fail(ErrorCode::Validation, "train_baseline: empty vocabulary");
  model.finalize();
  return model;
}

void BaselineModel::finalize() {
  const std::size_t k = labels_.size();
  std::size_t docs = 0;
  for (auto n : doc_counts_) docs += n;

  log_prior_.assign(k, kNegInf);
  for (std::size_t c = 0; c < k; ++c) {
    if (doc_counts_[c] > 0) {
      log_prior_[c] = std::log(static_cast<double>(doc_counts_[c]) / static_cast<double>(docs));
    }
  }

  std::vector<double> totals(k, 0.0);
  for (const auto& [tok, counts] : vocabulary_) {
    for (std::size_t c = 0; c < k; ++c) totals[c] += static_cast<double>(counts[c]);
  }
  const double v = static_cast<double>(vocabulary_.size());
  log_likelihood_.clear();
  log_likelihood_.reserve(vocabulary_.size());
  for (const auto& [tok, counts] : vocabulary_) {
    std::vector<double> ll(k);
    for (std::size_t c = 0; c < k; ++c) {
      ll[c] = std::log((static_cast<double>(counts[c]) + alpha_) / (totals[c] + alpha_ * v));
    }
    log_likelihood_.emplace(tok, std::move(ll));
  }
}

std::map<std::string, std::size_t> BaselineModel::class_counts() const {
  std::map<std::string, std::size_t> out;
  for (std::size_t c = 0; c < labels_.size(); ++c) out[labels_[c]] = doc_counts_[c];
  return out;
}

std::vector<double> BaselineModel::log_scores(std::string_view input) const {
  std::vector<double> scores = log_prior_;
  for (const auto& tok : tokenize(input)) {
    auto it = log_likelihood_.find(tok);
    if (it == log_likelihood_.end()) continue;
    for (std::size_t c = 0; c < scores.size(); ++c) scores[c] += it->second[c];
  }
  return scores;
}

std::vector<double> BaselineModel::posterior(std::string_view input) const {
  auto scores = log_scores(input);
  const double top = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (auto& s : scores) {
    s = std::isinf(s) ? 0.0 : std::exp(s - top);
    sum += s;
  }
  for (auto& s : scores) s /= sum;
  return scores;
}

std::string BaselineModel::predict(std::string_view input) const {
  const auto scores = log_scores(input);
  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c) {
    if (scores[c] > scores[best] ||
        (scores[c] == scores[best] && doc_counts_[c] > doc_counts_[best])) {
      best = c;
    }
  }
  return labels_[best];
}

Json BaselineModel::to_json() const {
  Json j;
  j["kind"] = "multinomial-naive-bayes";
  j["alpha"] = alpha_;
  j["labels"] = labels_;
  j["doc_counts"] = doc_counts_;
  j["vocabulary"] = Json::object();
  for (const auto& [tok, counts] : vocabulary_) j["vocabulary"][tok] = counts;
  return j;
}

BaselineModel BaselineModel::from_json(const Json& j) {
  BaselineModel model;
  try {
    if (j.at("kind").get<std::string>() != "multinomial-naive-bayes") {
      fail(ErrorCode::Parse, "model: unsupported kind");
    }
    model.alpha_ = j.at("alpha").get<double>();
    model.labels_ = j.at("labels").get<std::vector<std::string>>();
    model.doc_counts_ = j.at("doc_counts").get<std::vector<std::size_t>>();
    for (const auto& [tok, counts] : j.at("vocabulary").items()) {
      model.vocabulary_[tok] = counts.get<std::vector<std::size_t>>();
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("model: ") + e.what());
  }
  if (model.labels_.empty() || model.doc_counts_.size() != model.labels_.size()) {
    fail(ErrorCode::Parse, "model: labels and doc_counts disagree");
  }
  for (const auto& [tok, counts] : model.vocabulary_) {
    if (counts.size() != model.labels_.size()) {
      fail(ErrorCode::Parse, "model: token '" + tok + "' has wrong count arity");
    }
  }
  model.finalize();
  return model;
}

BaselineModel load_baseline(const std::string& path) {
  return BaselineModel::from_json(read_json_file(path));
}

void save_baseline(const std::string& path, const BaselineModel& model) {
  write_json_file(path, model.to_json());
}

}  // namespace facetag
