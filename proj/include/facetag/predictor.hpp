#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "facetag/baseline.hpp"
#include "facetag/example_builder.hpp"
#include "facetag/external.hpp"
#include "facetag/repair.hpp"

namespace facetag {

// Valid outputs of one task plus the training-label counts used to break
// repair ties.
struct LabelSpace {
  std::vector<std::string> labelset;
  std::map<std::string, std::size_t> train_freqs;
};

struct RepairSpaces {
  LabelSpace face_acts;
  LabelSpace dialog_acts;  // empty labelset when no dialog-act task is present

  const LabelSpace& for_task(std::string_view task) const;
};

// Face-act space is always the nine labels; dialog-act space is the given
// tagset, or the dialog-act targets seen in training.
RepairSpaces repair_spaces_from(const std::vector<Example>& training,
                                const std::vector<std::string>& dialog_act_tags = {});

std::vector<PredictionRecord> repair_all(const std::vector<RawPrediction>& raw,
                                         const std::vector<Example>& examples,
                                         const RepairSpaces& spaces);

std::vector<PredictionRecord> predict_with_baseline(const BaselineModel& model,
                                                    const std::vector<Example>& examples,
                                                    const RepairSpaces& spaces);

std::vector<PredictionRecord> predict_with_external(const std::vector<Example>& examples,
                                                    const ExternalPredictorConfig& config,
                                                    const RepairSpaces& spaces);

std::vector<ExternalRequest> requests_for(const std::vector<Example>& examples);

// Folds that carry test examples, ascending.
std::vector<int> folds_present(const std::vector<Example>& examples);

// For every fold f: train on all examples outside f (auxiliary examples with
// no fold are always training data), predict the examples of f, and repair
// with that fold's training frequencies. Folds run on up to jobs threads.
std::vector<PredictionRecord> crossval_baseline(const std::vector<Example>& examples,
                                                double alpha = 1.0, int jobs = 1);

}  // namespace facetag
