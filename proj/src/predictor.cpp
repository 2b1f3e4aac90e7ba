#include "facetag/predictor.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <set>
#include <thread>
#include <unordered_map>

#include "facetag/error.hpp"
#include "facetag/labels.hpp"

namespace facetag {

const LabelSpace& RepairSpaces::for_task(std::string_view task) const {
  if (task == kDialogActTask) {
    if (dialog_acts.labelset.empty()) {
      fail(ErrorCode::InvalidArgument, "no dialog-act label space for repair");
    }
    return dialog_acts;
  }
  return face_acts;
}

RepairSpaces repair_spaces_from(const std::vector<Example>& training,
                                const std::vector<std::string>& dialog_act_tags) {
  RepairSpaces spaces;
  spaces.face_acts.labelset = face_act_labelset();
  spaces.dialog_acts.labelset = dialog_act_tags;
  std::set<std::string> known(dialog_act_tags.begin(), dialog_act_tags.end());
  for (const auto& e : training) {
    if (e.variant == ExampleVariant::MtlDa) {
      ++spaces.dialog_acts.train_freqs[e.target];
      if (dialog_act_tags.empty() && known.insert(e.target).second) {
        spaces.dialog_acts.labelset.push_back(e.target);
      }
    } else {
      ++spaces.face_acts.train_freqs[e.target];
    }
  }
  return spaces;
}

std::vector<ExternalRequest> requests_for(const std::vector<Example>& examples) {
  std::vector<ExternalRequest> out;
  out.reserve(examples.size());
  for (const auto& e : examples) {
    out.push_back(ExternalRequest{e.id, std::string(task_of(e.variant)), e.input});
  }
  return out;
}

std::vector<PredictionRecord> repair_all(const std::vector<RawPrediction>& raw,
                                         const std::vector<Example>& examples,
                                         const RepairSpaces& spaces) {
  std::unordered_map<std::string, const Example*> by_id;
  for (const auto& e : examples) by_id.emplace(e.id, &e);
  std::vector<PredictionRecord> out;
  out.reserve(raw.size());
  for (const auto& r : raw) {
    auto it = by_id.find(r.example_id);
    if (it == by_id.end()) {
      fail(ErrorCode::InvalidArgument, "prediction for unknown example '" + r.example_id + "'");
    }
    const auto& space = spaces.for_task(task_of(it->second->variant));
    auto record = repair_label(r.output, space.labelset, space.train_freqs);
    record.example_id = r.example_id;
    record.fold = it->second->fold;
    out.push_back(std::move(record));
  }
  return out;
}

std::vector<PredictionRecord> predict_with_baseline(const BaselineModel& model,
                                                    const std::vector<Example>& examples,
                                                    const RepairSpaces& spaces) {
  std::vector<RawPrediction> raw;
  raw.reserve(examples.size());
  for (const auto& e : examples) raw.push_back(RawPrediction{e.id, model.predict(e.input)});
  return repair_all(raw, examples, spaces);
}

std::vector<PredictionRecord> predict_with_external(const std::vector<Example>& examples,
                                                    const ExternalPredictorConfig& config,
                                                    const RepairSpaces& spaces) {
  return repair_all(run_external(requests_for(examples), config), examples, spaces);
}

std::vector<int> folds_present(const std::vector<Example>& examples) {
  std::set<int> folds;
  for (const auto& e : examples) {
    if (e.fold != kNoFold) folds.insert(e.fold);
  }
  return {folds.begin(), folds.end()};
}

std::vector<PredictionRecord> crossval_baseline(const std::vector<Example>& examples,
                                                double alpha, int jobs) {
  const auto folds = folds_present(examples);
  if (folds.size() < 2) {
    fail(ErrorCode::Validation, "cross-validation needs at least two folds");
  }
  auto run_fold = [&](int fold) {
    std::vector<Example> train, test;
    for (const auto& e : examples) (e.fold == fold ? test : train).push_back(e);
    const auto model = BaselineModel::train(train, alpha);
    const auto spaces = repair_spaces_from(train);
    return predict_with_baseline(model, test, spaces);
  };

  // Results are stitched back in fold order, so output does not depend on jobs.
  std::vector<std::vector<PredictionRecord>> per_fold(folds.size());
  std::vector<std::exception_ptr> errors(folds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < folds.size();) {
      try {
        per_fold[i] = run_fold(folds[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(1, jobs));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(threads, folds.size()); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<PredictionRecord> out;
  for (auto& records : per_fold) {
    out.insert(out.end(), std::make_move_iterator(records.begin()),
               std::make_move_iterator(records.end()));
  }
  return out;
}

}  // namespace facetag
