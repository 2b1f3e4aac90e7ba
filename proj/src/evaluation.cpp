#include "facetag/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <unordered_map>

#include "facetag/error.hpp"
#include "facetag/example_builder.hpp"

namespace facetag {

namespace {

double metric_of(const PerLabelMetrics& m, CompareMetric metric) {
  switch (metric) {
    case CompareMetric::Precision: return m.precision;
    case CompareMetric::Recall: return m.recall;
    case CompareMetric::F1: return m.f1;
  }
  return m.f1;
}

double metric_of(const AggregateMetrics& m, CompareMetric metric) {
  switch (metric) {
    case CompareMetric::Precision: return m.precision;
    case CompareMetric::Recall: return m.recall;
    case CompareMetric::F1: return m.f1;
  }
  return m.f1;
}

const PerLabelMetrics& label_in(const MetricsReport& r, const std::string& label,
                                const std::string& system) {
  const auto* m = r.find(label);
  if (!m) fail(ErrorCode::Validation, "report for " + system + " lacks label " + label);
  return *m;
}

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width, bool right = true) {
  if (s.size() >= width) return s;
  return right ? std::string(width - s.size(), ' ') + s : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::vector<std::string> task_labelset(const Corpus& corpus, std::string_view task) {
  if (task == kFaceActTask) return face_act_labelset();
  if (task == kDialogActTask) {
    if (!corpus.tagset()) fail(ErrorCode::Validation, "gold corpus has no dialog-act tagset");
    return corpus.tagset()->tags();
  }
  fail(ErrorCode::InvalidArgument, "unknown task '" + std::string(task) + "'");
}

Alignment align_predictions(const std::vector<PredictionRecord>& predictions, const Corpus& corpus,
                            std::string_view task) {
  const bool face = task == kFaceActTask;
  if (!face && task != kDialogActTask) {
    fail(ErrorCode::InvalidArgument, "unknown task '" + std::string(task) + "'");
  }
  // Lowest fold per example id.
  std::unordered_map<std::string, int> keep;
  std::map<std::pair<std::string, int>, int> seen;
  for (const auto& p : predictions) {
    if (++seen[{p.example_id, p.fold}] > 1) {
      fail(ErrorCode::Validation, "prediction for " + p.example_id + " repeated in fold " +
                                      std::to_string(p.fold));
    }
    auto [it, inserted] = keep.emplace(p.example_id, p.fold);
    if (!inserted) it->second = std::min(it->second, p.fold);
  }

  Alignment out;
  for (const auto& p : predictions) {
    if (keep.at(p.example_id) != p.fold) {
      out.dropped.push_back(p.example_id + "@" + std::to_string(p.fold));
      continue;
    }
    const auto parts = split_example_id(p.example_id);
    if (!parts) fail(ErrorCode::Validation, "malformed example id '" + p.example_id + "'");
    const auto* u = corpus.find(parts->first, parts->second);
    if (!u) fail(ErrorCode::Validation, "prediction " + p.example_id + " has no gold utterance");
    AlignedPrediction a;
    a.example_id = p.example_id;
    a.fold = p.fold;
    a.predicted = p.label;
    a.utterance = u;
    if (face) {
      if (!u->face_act) fail(ErrorCode::Validation, "gold utterance " + p.example_id + " has no face_act");
      a.gold = std::string(to_string(*u->face_act));
    } else {
      if (!u->dialog_act) {
        fail(ErrorCode::Validation, "gold utterance " + p.example_id + " has no dialog_act");
      }
      a.gold = u->dialog_act->name;
    }
    out.items.push_back(std::move(a));
  }
  return out;
}

Evaluation evaluate(const Alignment& alignment, const std::vector<std::string>& labelset,
                    std::string_view task, const std::set<std::string>& excluded) {
  if (alignment.items.empty()) fail(ErrorCode::Validation, "no predictions to evaluate");
  std::map<int, ConfusionMatrix> by_fold;
  for (const auto& a : alignment.items) {
    by_fold.try_emplace(a.fold, labelset).first->second.add(a.gold, a.predicted);
  }
  Evaluation e;
  e.task = std::string(task);
  e.labelset = labelset;
  e.dropped = alignment.dropped;
  for (const auto& [fold, cm] : by_fold) {
    e.folds.push_back(fold);
    e.per_fold.push_back(report(cm, excluded));
  }
  e.average = average_folds(e.per_fold);
  return e;
}

ConfusionMatrix pooled_confusion(const Alignment& alignment,
                                 const std::vector<std::string>& labelset) {
  ConfusionMatrix cm(labelset);
  for (const auto& a : alignment.items) cm.add(a.gold, a.predicted);
  return cm;
}

Json Evaluation::to_json() const {
  Json j;
  j["task"] = task;
  j["labelset"] = labelset;
  j["macro_scope"] = "labels with gold support in each fold";
  j["average"] = average.to_json();
  j["per_fold"] = Json::array();
  for (std::size_t i = 0; i < folds.size(); ++i) {
    Json f;
    f["fold"] = folds[i];
    f["report"] = per_fold[i].to_json();
    j["per_fold"].push_back(std::move(f));
  }
  j["dropped_duplicates"] = dropped;
  return j;
}

Evaluation Evaluation::from_json(const Json& j) {
  Evaluation e;
  try {
    e.task = j.at("task").get<std::string>();
    e.labelset = j.at("labelset").get<std::vector<std::string>>();
    e.average = MetricsReport::from_json(j.at("average"));
    for (const auto& f : j.at("per_fold")) {
      e.folds.push_back(f.at("fold").get<int>());
      e.per_fold.push_back(MetricsReport::from_json(f.at("report")));
    }
    if (j.contains("dropped_duplicates")) {
      e.dropped = j.at("dropped_duplicates").get<std::vector<std::string>>();
    }
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::Parse, std::string("evaluation report: ") + ex.what());
  }
  return e;
}

std::string_view to_string(CompareMetric m) noexcept {
  switch (m) {
    case CompareMetric::Precision: return "precision";
    case CompareMetric::Recall: return "recall";
    case CompareMetric::F1: return "f1";
  }
  return "f1";
}

std::string_view to_string(CompareLevel l) noexcept {
  switch (l) {
    case CompareLevel::Label: return "label";
    case CompareLevel::Aggregate: return "aggregate";
    case CompareLevel::AcrossLabels: return "across-labels";
  }
  return "label";
}

std::optional<CompareMetric> parse_compare_metric(std::string_view text) noexcept {
  for (auto m : {CompareMetric::Precision, CompareMetric::Recall, CompareMetric::F1}) {
    if (text == to_string(m)) return m;
  }
  return std::nullopt;
}

std::optional<CompareLevel> parse_compare_level(std::string_view text) noexcept {
  for (auto l : {CompareLevel::Label, CompareLevel::Aggregate, CompareLevel::AcrossLabels}) {
    if (text == to_string(l)) return l;
  }
  return std::nullopt;
}

Comparison compare_systems(const std::vector<std::string>& names,
                           const std::vector<Evaluation>& systems, const CompareOptions& options) {
  if (names.size() != systems.size()) {
    fail(ErrorCode::InvalidArgument, "compare: names and systems differ in length");
  }
  if (systems.size() < 2) fail(ErrorCode::Validation, "compare needs at least two systems");
  if (options.aggregate != "macro" && options.aggregate != "micro") {
    fail(ErrorCode::Validation, "compare: aggregate must be 'macro' or 'micro'");
  }
  const auto& first = systems.front();
  for (std::size_t s = 1; s < systems.size(); ++s) {
    if (systems[s].task != first.task) {
      fail(ErrorCode::Validation, "compare: " + names[s] + " scores a different task");
    }
    if (systems[s].folds != first.folds) {
      fail(ErrorCode::Validation, "compare: " + names[s] + " was scored on different folds");
    }
  }

  // Labels supported in every system's averaged report.
  std::vector<std::string> labels;
  for (const auto& l : first.average.macro_labels) {
    if (options.excluded.count(l)) continue;
    const bool everywhere = std::all_of(systems.begin(), systems.end(), [&](const Evaluation& e) {
      return std::find(e.average.macro_labels.begin(), e.average.macro_labels.end(), l) !=
             e.average.macro_labels.end();
    });
    if (everywhere) labels.push_back(l);
  }

  Comparison c;
  c.metric = options.metric;
  c.level = options.level;
  c.aggregate = options.aggregate;
  c.systems = names;

  auto fold_blocks = [&] {
    std::vector<std::string> blocks;
    for (int f : first.folds) blocks.push_back(std::to_string(f));
    return blocks;
  };
  auto finish = [&](ComparisonRow row) {
    row.result = friedman(BlockMatrix::from_rows(row.values), options.friedman);
    c.rows.push_back(std::move(row));
  };

  switch (options.level) {
    case CompareLevel::Label:
      for (const auto& label : labels) {
        ComparisonRow row;
        row.name = label;
        row.blocks = fold_blocks();
        for (std::size_t f = 0; f < first.folds.size(); ++f) {
          std::vector<double> cells;
          for (std::size_t s = 0; s < systems.size(); ++s) {
            cells.push_back(metric_of(label_in(systems[s].per_fold[f], label, names[s]),
                                      options.metric));
          }
          row.values.push_back(std::move(cells));
        }
        finish(std::move(row));
      }
      break;
    case CompareLevel::Aggregate: {
      ComparisonRow row;
      row.name = options.aggregate;
      row.blocks = fold_blocks();
      for (std::size_t f = 0; f < first.folds.size(); ++f) {
        std::vector<double> cells;
        for (const auto& e : systems) {
          const auto& r = e.per_fold[f];
          cells.push_back(metric_of(options.aggregate == "micro" ? r.micro : r.macro,
                                    options.metric));
        }
        row.values.push_back(std::move(cells));
      }
      finish(std::move(row));
      break;
    }
    case CompareLevel::AcrossLabels: {
      ComparisonRow row;
      row.name = "labels";
      row.blocks = labels;
      for (const auto& label : labels) {
        std::vector<double> cells;
        for (std::size_t s = 0; s < systems.size(); ++s) {
          cells.push_back(metric_of(label_in(systems[s].average, label, names[s]), options.metric));
        }
        row.values.push_back(std::move(cells));
      }
      finish(std::move(row));
      break;
    }
  }
  return c;
}

Json Comparison::to_json() const {
  Json j;
  j["metric"] = std::string(to_string(metric));
  j["level"] = std::string(to_string(level));
  j["aggregate"] = aggregate;
  j["systems"] = systems;
  j["rows"] = Json::array();
  for (const auto& r : rows) {
    Json row;
    row["name"] = r.name;
    row["blocks"] = r.blocks;
    row["values"] = r.values;
    row["friedman"] = r.result.to_json();
    j["rows"].push_back(std::move(row));
  }
  return j;
}

std::string Comparison::render() const {
  std::ostringstream out;
  std::size_t width = 10;
  for (const auto& r : rows) width = std::max(width, r.name.size() + 4);
  out << pad(std::string(to_string(metric)), width, false);
  for (const auto& s : systems) out << pad(s, std::max<std::size_t>(10, s.size() + 2));
  out << pad("Q", 9) << pad("p", 9) << pad("W", 7) << "  effect\n";
  for (const auto& r : rows) {
    out << pad(r.name + r.result.marker(), width, false);
    for (std::size_t s = 0; s < systems.size(); ++s) {
      // Mean of the compared values; the test itself uses within-block ranks.
      double mean = 0.0;
      for (const auto& block : r.values) mean += block[s];
      mean /= static_cast<double>(r.values.size());
      out << pad(fixed(mean, 3), std::max<std::size_t>(10, systems[s].size() + 2));
    }
    out << pad(fixed(r.result.q, 3), 9) << pad(fixed(r.result.p, 4), 9)
        << pad(fixed(r.result.w, 3), 7) << "  " << to_string(r.result.interpretation) << '\n';
  }
  out << "++ p < 0.05, + p < 0.10 (Friedman rank sum test)\n";
  return out.str();
}

}  // namespace facetag
