#include "facetag/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "facetag/error.hpp"

namespace facetag {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

Json aggregate_json(const AggregateMetrics& a) {
  Json j;
  j["precision"] = a.precision;
  j["recall"] = a.recall;
  j["f1"] = a.f1;
  return j;
}

AggregateMetrics aggregate_from(const Json& j) {
  return {j.at("precision").get<double>(), j.at("recall").get<double>(), j.at("f1").get<double>()};
}

AggregateMetrics macro_over(const std::vector<PerLabelMetrics>& rows,
                            const std::vector<std::string>& include) {
  AggregateMetrics m;
  std::size_t k = 0;
  for (const auto& r : rows) {
    if (std::find(include.begin(), include.end(), r.label) == include.end()) continue;
    m.precision += r.precision;
    m.recall += r.recall;
    m.f1 += r.f1;
    ++k;
  }
  if (k > 0) {
    m.precision /= static_cast<double>(k);
    m.recall /= static_cast<double>(k);
    m.f1 /= static_cast<double>(k);
  }
  return m;
}

std::string fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width, bool left = false) {
  if (s.size() >= width) return s;
  return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> labelset)
    : labels_(std::move(labelset)), counts_(labels_.size() * labels_.size(), 0) {
  if (labels_.empty()) fail(ErrorCode::InvalidArgument, "confusion: empty labelset");
  std::set<std::string_view> seen;
  for (const auto& l : labels_) {
    if (!seen.insert(l).second) fail(ErrorCode::InvalidArgument, "confusion: duplicate label " + l);
  }
}

std::size_t ConfusionMatrix::index(std::string_view label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) {
    fail(ErrorCode::UnknownLabel, "label '" + std::string(label) + "' outside the labelset");
  }
  return static_cast<std::size_t>(it - labels_.begin());
}

void ConfusionMatrix::add(std::string_view gold, std::string_view predicted, std::size_t times) {
  counts_[index(gold) * labels_.size() + index(predicted)] += times;
  total_ += times;
}

std::size_t ConfusionMatrix::row_sum(std::size_t gold) const {
  std::size_t s = 0;
  for (std::size_t p = 0; p < size(); ++p) s += at(gold, p);
  return s;
}

std::size_t ConfusionMatrix::col_sum(std::size_t predicted) const {
  std::size_t s = 0;
  for (std::size_t g = 0; g < size(); ++g) s += at(g, predicted);
  return s;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t s = 0;
  for (std::size_t i = 0; i < size(); ++i) s += at(i, i);
  return s;
}

Json ConfusionMatrix::to_json() const {
  Json j;
  j["labels"] = labels_;
  j["counts"] = Json::array();
  for (std::size_t g = 0; g < size(); ++g) {
    Json row = Json::array();
    for (std::size_t p = 0; p < size(); ++p) row.push_back(at(g, p));
    j["counts"].push_back(std::move(row));
  }
  j["normalized"] = row_normalize(*this);
  j["total"] = total_;
  return j;
}

ConfusionMatrix confusion(const std::vector<std::pair<std::string, std::string>>& pairs,
                          const std::vector<std::string>& labelset) {
  ConfusionMatrix cm(labelset);
  for (const auto& [gold, predicted] : pairs) cm.add(gold, predicted);
  return cm;
}

std::vector<std::vector<double>> row_normalize(const ConfusionMatrix& cm) {
  std::vector<std::vector<double>> out(cm.size(), std::vector<double>(cm.size(), 0.0));
  for (std::size_t g = 0; g < cm.size(); ++g) {
    const std::size_t support = cm.row_sum(g);
    if (support == 0) continue;
    for (std::size_t p = 0; p < cm.size(); ++p) out[g][p] = ratio(cm.at(g, p), support);
  }
  return out;
}

double f1_score(double precision, double recall) noexcept {
  if (precision + recall <= 0.0) return 0.0;
  if (precision == recall) return precision;
  return 2.0 * precision * recall / (precision + recall);
}

const PerLabelMetrics* MetricsReport::find(std::string_view label) const {
  for (const auto& r : per_label) {
    if (r.label == label) return &r;
  }
  return nullptr;
}

MetricsReport report(const ConfusionMatrix& cm, const std::set<std::string>& excluded) {
  MetricsReport r;
  r.n = cm.total();
  for (std::size_t i = 0; i < cm.size(); ++i) {
    PerLabelMetrics m;
    m.label = cm.labels()[i];
    m.support = cm.row_sum(i);
    m.predicted = cm.col_sum(i);
    m.precision = ratio(cm.at(i, i), m.predicted);
    m.recall = ratio(cm.at(i, i), m.support);
    m.f1 = f1_score(m.precision, m.recall);
    if (m.support > 0) r.macro_labels.push_back(m.label);
    r.per_label.push_back(std::move(m));
  }
  // Each example carries exactly one gold and one predicted label, so pooled
  // precision and recall both equal accuracy.
  const double accuracy = ratio(cm.trace(), cm.total());
  r.micro = {accuracy, accuracy, accuracy};
  r.macro = macro_over(r.per_label, r.macro_labels);
  for (const auto& label : excluded) {
    std::vector<std::string> keep;
    for (const auto& l : r.macro_labels) {
      if (l != label) keep.push_back(l);
    }
    r.macro_excluding[label] = macro_over(r.per_label, keep);
  }
  return r;
}

MetricsReport average_folds(const std::vector<MetricsReport>& reports) {
  if (reports.empty()) fail(ErrorCode::InvalidArgument, "average_folds: no reports");
  const auto& first = reports.front();
  for (const auto& r : reports) {
    if (r.per_label.size() != first.per_label.size()) {
      fail(ErrorCode::InvalidArgument, "average_folds: reports use different labelsets");
    }
    for (std::size_t i = 0; i < r.per_label.size(); ++i) {
      if (r.per_label[i].label != first.per_label[i].label) {
        fail(ErrorCode::InvalidArgument, "average_folds: reports use different labelsets");
      }
    }
    if (r.macro_excluding.size() != first.macro_excluding.size()) {
      fail(ErrorCode::InvalidArgument, "average_folds: reports exclude different labels");
    }
  }

  const double k = static_cast<double>(reports.size());
  MetricsReport avg;
  avg.folds = 0;
  avg.per_label = first.per_label;
  for (auto& m : avg.per_label) {
    m.precision = m.recall = m.f1 = 0.0;
    m.support = m.predicted = 0;
  }
  for (const auto& [label, agg] : first.macro_excluding) avg.macro_excluding[label] = {};

  auto accumulate = [](AggregateMetrics& into, const AggregateMetrics& x) {
    into.precision += x.precision;
    into.recall += x.recall;
    into.f1 += x.f1;
  };
  auto scale = [k](AggregateMetrics& a) {
    a.precision /= k;
    a.recall /= k;
    a.f1 /= k;
  };

  for (const auto& r : reports) {
    for (std::size_t i = 0; i < r.per_label.size(); ++i) {
      avg.per_label[i].precision += r.per_label[i].precision;
      avg.per_label[i].recall += r.per_label[i].recall;
      avg.per_label[i].f1 += r.per_label[i].f1;
      avg.per_label[i].support += r.per_label[i].support;
      avg.per_label[i].predicted += r.per_label[i].predicted;
    }
    accumulate(avg.micro, r.micro);
    accumulate(avg.macro, r.macro);
    for (const auto& [label, agg] : r.macro_excluding) {
      auto it = avg.macro_excluding.find(label);
      if (it == avg.macro_excluding.end()) {
        fail(ErrorCode::InvalidArgument, "average_folds: reports exclude different labels");
      }
      accumulate(it->second, agg);
    }
    avg.n += r.n;
    avg.folds += r.folds;
  }
  for (auto& m : avg.per_label) {
    m.precision /= k;
    m.recall /= k;
    m.f1 /= k;
    if (m.support > 0) avg.macro_labels.push_back(m.label);
  }
  scale(avg.micro);
  scale(avg.macro);
  for (auto& [label, agg] : avg.macro_excluding) scale(agg);
  return avg;
}

Json MetricsReport::to_json() const {
  Json j;
  j["n"] = n;
  j["folds"] = folds;
  j["micro"] = aggregate_json(micro);
  j["macro"] = aggregate_json(macro);
  j["macro_excluding"] = Json::object();
  for (const auto& [label, agg] : macro_excluding) j["macro_excluding"][label] = aggregate_json(agg);
  j["macro_labels"] = macro_labels;
  j["per_label"] = Json::array();
  for (const auto& m : per_label) {
    Json row;
    row["label"] = m.label;
    row["precision"] = m.precision;
    row["recall"] = m.recall;
    row["f1"] = m.f1;
    row["support"] = m.support;
    row["predicted"] = m.predicted;
    j["per_label"].push_back(std::move(row));
  }
  return j;
}

MetricsReport MetricsReport::from_json(const Json& j) {
  MetricsReport r;
  try {
    r.n = j.at("n").get<std::size_t>();
    r.folds = j.value("folds", std::size_t{1});
    r.micro = aggregate_from(j.at("micro"));
    r.macro = aggregate_from(j.at("macro"));
    if (j.contains("macro_excluding")) {
      for (const auto& [label, agg] : j.at("macro_excluding").items()) {
        r.macro_excluding[label] = aggregate_from(agg);
      }
    }
    if (j.contains("macro_labels")) {
      r.macro_labels = j.at("macro_labels").get<std::vector<std::string>>();
    }
    for (const auto& row : j.at("per_label")) {
      PerLabelMetrics m;
      m.label = row.at("label").get<std::string>();
      m.precision = row.at("precision").get<double>();
      m.recall = row.at("recall").get<double>();
      m.f1 = row.at("f1").get<double>();
      m.support = row.at("support").get<std::size_t>();
      m.predicted = row.value("predicted", std::size_t{0});
      r.per_label.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("metrics report: ") + e.what());
  }
  return r;
}

std::string render_report_table(const MetricsReport& r) {
  std::ostringstream out;
  out << pad("", 12, true) << pad("P", 8) << pad("R", 8) << pad("F1", 8) << pad("support", 9)
      << '\n';
  auto agg_row = [&](const std::string& name, const AggregateMetrics& a) {
    out << pad(name, 12, true) << pad(fixed(a.precision), 8) << pad(fixed(a.recall), 8)
        << pad(fixed(a.f1), 8) << pad("-", 9) << '\n';
  };
  agg_row("micro", r.micro);
  agg_row("macro", r.macro);
  for (const auto& [label, agg] : r.macro_excluding) agg_row("macro-" + label, agg);
  for (const auto& m : r.per_label) {
    out << pad(m.label, 12, true) << pad(fixed(m.precision), 8) << pad(fixed(m.recall), 8)
        << pad(fixed(m.f1), 8) << pad(std::to_string(m.support), 9) << '\n';
  }
  out << "n=" << r.n << " folds=" << r.folds << '\n';
  return out.str();
}

std::string render_confusion_table(const ConfusionMatrix& cm, bool normalized) {
  const auto norm = row_normalize(cm);
  std::ostringstream out;
  out << pad("gold\\pred", 10, true);
  for (const auto& l : cm.labels()) out << pad(l, 8);
  out << '\n';
  for (std::size_t g = 0; g < cm.size(); ++g) {
    out << pad(cm.labels()[g], 10, true);
    for (std::size_t p = 0; p < cm.size(); ++p) {
      out << pad(normalized ? fixed(norm[g][p], 2) : std::to_string(cm.at(g, p)), 8);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace facetag
