#include "facetag/facetag.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <map>
#include <new>
#include <set>
#include <string>
#include <unordered_map>

#include "facetag/baseline.hpp"
#include "facetag/config.hpp"
#include "facetag/corpus.hpp"
#include "facetag/error.hpp"
#include "facetag/error_analysis.hpp"
#include "facetag/evaluation.hpp"
#include "facetag/example_builder.hpp"
#include "facetag/predictor.hpp"
#include "facetag/repair.hpp"
#include "facetag/stats.hpp"

struct ft_corpus {
  facetag::Corpus corpus;
};
struct ft_examples {
  std::vector<facetag::Example> examples;
};
struct ft_model {
  facetag::BaselineModel model;
};
struct ft_predictions {
  std::vector<facetag::PredictionRecord> records;
};

namespace {

using facetag::ErrorCode;
using facetag::fail;
using facetag::Json;

thread_local std::string last_error;

ft_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return FT_ERR_INVALID_ARGUMENT;
    case ErrorCode::Parse: return FT_ERR_PARSE;
    case ErrorCode::UnknownLabel: return FT_ERR_UNKNOWN_LABEL;
    case ErrorCode::Validation: return FT_ERR_VALIDATION;
    case ErrorCode::Io: return FT_ERR_IO;
    case ErrorCode::Protocol: return FT_ERR_PROTOCOL;
    case ErrorCode::Timeout: return FT_ERR_TIMEOUT;
    case ErrorCode::MissingResponse: return FT_ERR_MISSING_RESPONSE;
    case ErrorCode::NonConvergence: return FT_ERR_NON_CONVERGENCE;
  }
  return FT_ERR_INTERNAL;
}

template <typename F>
ft_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return FT_OK;
  } catch (const facetag::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const nlohmann::json::exception& e) {
    last_error = e.what();
    return FT_ERR_PARSE;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return FT_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return FT_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return FT_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) fail(ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

char* to_c_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void put(char** out, const std::string& s) {
  if (out) *out = to_c_string(s);
}

void put_json(char** out, const Json& j) { put(out, j.dump(2)); }

Json parse_json_arg(const char* text, const char* what) {
  if (!text) return Json();
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string(what) + ": " + e.what());
  }
}

facetag::RunConfig config_from(const char* config_json) {
  return facetag::RunConfig::from_json(parse_json_arg(config_json, "config"));
}

std::string task_from(const char* task) {
  if (!task) return std::string(facetag::kFaceActTask);
  const std::string t = task;
  if (t == "face acts" || t == "face-acts" || t == "fa") return std::string(facetag::kFaceActTask);
  if (t == "dialog acts" || t == "dialog-acts" || t == "da") {
    return std::string(facetag::kDialogActTask);
  }
  fail(ErrorCode::Validation, "unknown task '" + t + "'");
}

facetag::ParseOptions parse_options_from(const facetag::RunConfig& c) {
  facetag::ParseOptions o;
  o.fold_count = c.fold_count;
  for (const auto& [from, to] : c.role_map) o.role_map[from] = *facetag::parse_speaker(to);
  if (c.tagset_registry) {
    o.tagset = facetag::load_tagset(*c.tagset_registry, c.tagset_id.value_or(""));
  } else if (c.tagset_id) {
    const auto builtin = facetag::mrda_basic_tagset();
    if (*c.tagset_id != builtin.id()) {
      fail(ErrorCode::Validation, "tagset '" + *c.tagset_id + "' needs a tagset_registry");
    }
    o.tagset = builtin;
  }
  return o;
}

template <typename T>
T* own(T value) {
  return new T(std::move(value));
}

// Repair spaces for predictions of a trained baseline: the model's class
// counts are its training frequencies.
facetag::RepairSpaces spaces_of(const facetag::BaselineModel& model) {
  facetag::RepairSpaces spaces;
  spaces.face_acts.labelset = facetag::face_act_labelset();
  const std::set<std::string> face(spaces.face_acts.labelset.begin(),
                                   spaces.face_acts.labelset.end());
  for (const auto& [label, n] : model.class_counts()) {
    if (face.count(label)) {
      spaces.face_acts.train_freqs[label] = n;
    } else {
      spaces.dialog_acts.train_freqs[label] = n;
    }
  }
  for (const auto& label : model.labels()) {
    if (!face.count(label)) spaces.dialog_acts.labelset.push_back(label);
  }
  return spaces;
}

}  // namespace

extern "C" {

const char* ft_version(void) { return "1.0.0"; }

const char* ft_status_name(ft_status status) {
  switch (status) {
    case FT_OK: return "ok";
    case FT_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case FT_ERR_PARSE: return "parse";
    case FT_ERR_UNKNOWN_LABEL: return "unknown-label";
    case FT_ERR_VALIDATION: return "validation";
    case FT_ERR_IO: return "io";
    case FT_ERR_PROTOCOL: return "protocol";
    case FT_ERR_TIMEOUT: return "timeout";
    case FT_ERR_MISSING_RESPONSE: return "missing-response";
    case FT_ERR_NON_CONVERGENCE: return "non-convergence";
    case FT_ERR_INTERNAL: return "internal";
  }
  return "internal";
}

const char* ft_last_error(void) { return last_error.c_str(); }

void ft_free(void* p) { std::free(p); }

ft_status ft_config_resolve(const char* config_path, const char* overrides_json,
                            char** resolved_json) {
  return guarded([&] {
    require(resolved_json, "resolved_json");
    std::optional<std::string> path;
    if (config_path) path = config_path;
    const auto c = facetag::resolve_config(path, parse_json_arg(overrides_json, "overrides"));
    put_json(resolved_json, c.to_json());
  });
}

ft_status ft_corpus_load(const char* path, const char* config_json, ft_corpus** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    const auto c = config_from(config_json);
    std::optional<facetag::FormatSpec> format;
    if (c.format.is_object()) format = facetag::FormatSpec::from_json(c.format);
    *out = own(ft_corpus{facetag::load_corpus(path, format, parse_options_from(c))});
  });
}

ft_status ft_corpus_save(const ft_corpus* corpus, const char* path) {
  return guarded([&] {
    require(corpus, "corpus");
    require(path, "path");
    facetag::save_corpus(path, corpus->corpus);
  });
}

ft_status ft_corpus_summary(const ft_corpus* corpus, char** json) {
  return guarded([&] {
    require(corpus, "corpus");
    put_json(json, facetag::corpus_summary(corpus->corpus));
  });
}

ft_status ft_corpus_dedupe(const ft_corpus* corpus, ft_corpus** out, char** report_json) {
  return guarded([&] {
    require(corpus, "corpus");
    require(out, "out");
    auto result = facetag::dedupe_folds(corpus->corpus);
    put_json(report_json, result.report());
    *out = own(ft_corpus{std::move(result.corpus)});
  });
}

ft_status ft_corpus_correlate(const ft_corpus* corpus, char** json, char** text) {
  return guarded([&] {
    require(corpus, "corpus");
    const auto m = facetag::da_fa_matrix(corpus->corpus);
    put_json(json, m.to_json());
    put(text, m.render());
  });
}

void ft_corpus_free(ft_corpus* corpus) { delete corpus; }

ft_status ft_examples_build(const ft_corpus* corpus, const char* variant, int context_size,
                            ft_examples** out) {
  return guarded([&] {
    require(corpus, "corpus");
    require(variant, "variant");
    require(out, "out");
    const auto v = facetag::parse_variant(variant);
    if (!v) fail(ErrorCode::Validation, std::string("unknown variant '") + variant + "'");
    *out = own(ft_examples{facetag::build_examples(corpus->corpus, *v, context_size)});
  });
}

ft_status ft_examples_mix(const ft_examples* face_acts, const ft_corpus* da_corpus,
                          double sample_fraction, uint64_t seed, int context_size,
                          ft_examples** out, char** report_json) {
  return guarded([&] {
    require(face_acts, "face_acts");
    require(da_corpus, "da_corpus");
    require(out, "out");
    facetag::MixPlan plan;
    plan.sample_fraction = sample_fraction;
    plan.seed = seed;
    auto result = facetag::mix_multitask(face_acts->examples, da_corpus->corpus, plan, context_size);
    put_json(report_json, result.report());
    *out = own(ft_examples{std::move(result.examples)});
  });
}

ft_status ft_examples_load(const char* path, ft_examples** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = own(ft_examples{facetag::load_examples(path)});
  });
}

ft_status ft_examples_save(const ft_examples* examples, const char* path) {
  return guarded([&] {
    require(examples, "examples");
    require(path, "path");
    facetag::save_examples(path, examples->examples);
  });
}

size_t ft_examples_count(const ft_examples* examples) {
  return examples ? examples->examples.size() : 0;
}

void ft_examples_free(ft_examples* examples) { delete examples; }

ft_status ft_model_train(const ft_examples* examples, double alpha, const int* holdout_fold,
                         ft_model** out) {
  return guarded([&] {
    require(examples, "examples");
    require(out, "out");
    if (!holdout_fold) {
      *out = own(ft_model{facetag::BaselineModel::train(examples->examples, alpha)});
      return;
    }
    std::vector<facetag::Example> train;
    for (const auto& e : examples->examples) {
      if (e.fold != *holdout_fold) train.push_back(e);
    }
    *out = own(ft_model{facetag::BaselineModel::train(train, alpha)});
  });
}

ft_status ft_model_load(const char* path, ft_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = own(ft_model{facetag::load_baseline(path)});
  });
}

ft_status ft_model_save(const ft_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    facetag::save_baseline(path, model->model);
  });
}

ft_status ft_model_summary(const ft_model* model, char** json) {
  return guarded([&] {
    require(model, "model");
    Json j;
    j["kind"] = "multinomial-naive-bayes";
    j["alpha"] = model->model.alpha();
    j["labels"] = model->model.labels();
    j["vocabulary_size"] = model->model.vocabulary_size();
    j["class_counts"] = Json::object();
    for (const auto& label : model->model.labels()) {
      j["class_counts"][label] = model->model.class_counts().at(label);
    }
    put_json(json, j);
  });
}

ft_status ft_model_predict_text(const ft_model* model, const char* input, char** label) {
  return guarded([&] {
    require(model, "model");
    require(input, "input");
    require(label, "label");
    put(label, model->model.predict(input));
  });
}

void ft_model_free(ft_model* model) { delete model; }

ft_status ft_predict_baseline(const ft_model* model, const ft_examples* test,
                              ft_predictions** out) {
  return guarded([&] {
    require(model, "model");
    require(test, "test");
    require(out, "out");
    *out = own(ft_predictions{
        facetag::predict_with_baseline(model->model, test->examples, spaces_of(model->model))});
  });
}

ft_status ft_predict_crossval(const ft_examples* examples, double alpha, int jobs,
                              ft_predictions** out) {
  return guarded([&] {
    require(examples, "examples");
    require(out, "out");
    *out = own(ft_predictions{facetag::crossval_baseline(examples->examples, alpha, jobs)});
  });
}

ft_status ft_predict_external(const ft_examples* test, const ft_examples* train,
                              const char* endpoint_json, ft_predictions** out) {
  return guarded([&] {
    require(test, "test");
    require(endpoint_json, "endpoint_json");
    require(out, "out");
    const auto config =
        facetag::ExternalPredictorConfig::from_json(parse_json_arg(endpoint_json, "endpoint"));
    const auto spaces = facetag::repair_spaces_from(train ? train->examples : test->examples);
    *out = own(
        ft_predictions{facetag::predict_with_external(test->examples, config, spaces)});
  });
}

ft_status ft_predictions_load(const char* path, ft_predictions** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = own(ft_predictions{facetag::load_predictions(path)});
  });
}

ft_status ft_predictions_save(const ft_predictions* predictions, const char* path) {
  return guarded([&] {
    require(predictions, "predictions");
    require(path, "path");
    facetag::save_predictions(path, predictions->records);
  });
}

ft_status ft_predictions_summary(const ft_predictions* predictions, char** json) {
  return guarded([&] {
    require(predictions, "predictions");
    Json j;
    std::size_t repaired = 0, ties = 0;
    std::map<int, std::size_t> per_fold;
    for (const auto& p : predictions->records) {
      repaired += p.repaired;
      ties += p.tie_broken;
      ++per_fold[p.fold];
    }
    j["predictions"] = predictions->records.size();
    j["repaired"] = repaired;
    j["tie_broken"] = ties;
    j["per_fold"] = Json::object();
    for (const auto& [fold, n] : per_fold) j["per_fold"][std::to_string(fold)] = n;
    put_json(json, j);
  });
}

size_t ft_predictions_count(const ft_predictions* predictions) {
  return predictions ? predictions->records.size() : 0;
}

void ft_predictions_free(ft_predictions* predictions) { delete predictions; }

ft_status ft_evaluate(const ft_predictions* predictions, const ft_corpus* gold, const char* task,
                      const char* config_json, char** json, char** text) {
  return guarded([&] {
    require(predictions, "predictions");
    require(gold, "gold");
    const auto c = config_from(config_json);
    const auto t = task_from(task);
    const auto alignment = facetag::align_predictions(predictions->records, gold->corpus, t);
    const std::set<std::string> excluded(c.excluded_labels.begin(), c.excluded_labels.end());
    const auto e =
        facetag::evaluate(alignment, facetag::task_labelset(gold->corpus, t), t, excluded);
    put_json(json, e.to_json());
    put(text, facetag::render_report_table(e.average));
  });
}

ft_status ft_confusion(const ft_predictions* predictions, const ft_corpus* gold, const char* task,
                       int normalized, char** json, char** text) {
  return guarded([&] {
    require(predictions, "predictions");
    require(gold, "gold");
    const auto t = task_from(task);
    const auto alignment = facetag::align_predictions(predictions->records, gold->corpus, t);
    const auto cm =
        facetag::pooled_confusion(alignment, facetag::task_labelset(gold->corpus, t));
    Json j = cm.to_json();
    j["task"] = t;
    put_json(json, j);
    put(text, facetag::render_confusion_table(cm, normalized != 0));
  });
}

ft_status ft_compare(const char* const* names, const char* const* reports, size_t count,
                     const char* options_json, char** json, char** text) {
  return guarded([&] {
    require(names, "names");
    require(reports, "reports");
    Json options = parse_json_arg(options_json, "options");
    if (options.is_null()) options = Json::object();
    facetag::CompareOptions o;
    auto take = [&](const char* key) -> std::string {
      if (!options.contains(key)) return {};
      auto v = options.at(key).get<std::string>();
      options.erase(key);
      return v;
    };
    if (auto m = take("metric"); !m.empty()) {
      auto parsed = facetag::parse_compare_metric(m);
      if (!parsed) fail(ErrorCode::Validation, "unknown metric '" + m + "'");
      o.metric = *parsed;
    }
    if (auto l = take("level"); !l.empty()) {
      auto parsed = facetag::parse_compare_level(l);
      if (!parsed) fail(ErrorCode::Validation, "unknown level '" + l + "'");
      o.level = *parsed;
    }
    if (auto a = take("aggregate"); !a.empty()) o.aggregate = a;
    const auto c = facetag::RunConfig::from_json(options);
    o.excluded = std::set<std::string>(c.excluded_labels.begin(), c.excluded_labels.end());
    o.friedman.alpha_levels = c.alpha_levels;
    o.friedman.exact = c.exact_p;
    o.friedman.permutation_draws = c.permutation_draws;
    o.friedman.seed = c.seed;

    std::vector<std::string> system_names;
    std::vector<facetag::Evaluation> systems;
    for (size_t i = 0; i < count; ++i) {
      require(names[i], "names[i]");
      require(reports[i], "reports[i]");
      system_names.emplace_back(names[i]);
      systems.push_back(facetag::Evaluation::from_json(parse_json_arg(reports[i], names[i])));
    }
    const auto cmp = facetag::compare_systems(system_names, systems, o);
    put_json(json, cmp.to_json());
    put(text, cmp.render());
  });
}

ft_status ft_correlate_report(const char* report_json, char** json, char** text) {
  return guarded([&] {
    require(report_json, "report_json");
    const auto e = facetag::Evaluation::from_json(parse_json_arg(report_json, "report"));
    Json j;
    j["statistic"] = "pearson";
    j["x"] = "support";
    j["y"] = "f1";
    std::vector<double> xs, ys;
    j["labels"] = Json::array();
    for (const auto& m : e.average.per_label) {
      if (m.support == 0) continue;
      j["labels"].push_back(m.label);
      xs.push_back(static_cast<double>(m.support));
      ys.push_back(m.f1);
    }
    j["support"] = xs;
    j["f1"] = ys;
    const double r = facetag::pearson(xs, ys);
    j["r"] = r;
    j["n"] = xs.size();
    put_json(json, j);
    char buf[96];
    std::snprintf(buf, sizeof buf, "pearson r(support, f1) = %.4f over %zu labels\n", r, xs.size());
    put(text, buf);
  });
}

ft_status ft_sample_errors(const ft_predictions* predictions, const ft_examples* examples,
                           const char* config_json, const char* sheet_path, char** json) {
  return guarded([&] {
    require(predictions, "predictions");
    require(examples, "examples");
    require(sheet_path, "sheet_path");
    const auto c = config_from(config_json);
    const auto items = facetag::join_scored(examples->examples, predictions->records);
    facetag::SamplingPlan plan;
    plan.per_fold = c.errors_per_fold;
    plan.cap = c.errors_cap;
    plan.seed = c.seed;
    const auto labels = facetag::face_act_labelset();
    const auto samples = facetag::sample_errors(items, labels, plan);
    facetag::save_annotation_sheet(sheet_path, samples);

    Json j;
    j["sheet"] = sheet_path;
    j["samples"] = samples.size();
    j["per_fold"] = plan.per_fold;
    j["cap"] = plan.cap;
    j["seed"] = plan.seed;
    j["per_label"] = Json::object();
    for (const auto& l : labels) {
      std::size_t n = 0;
      for (const auto& s : samples) n += s.gold == l;
      j["per_label"][l] = n;
    }
    put_json(json, j);
  });
}

ft_status ft_tally_errors(const char* sheet_path, char** json, char** text) {
  return guarded([&] {
    require(sheet_path, "sheet_path");
    const auto samples = facetag::load_annotation_sheet(sheet_path, true);
    const auto t = facetag::tally_errors(samples, facetag::face_act_labelset());
    put_json(json, t.to_json());
    put(text, t.render());
  });
}

ft_status ft_shift(const ft_predictions* system_a, const ft_predictions* system_b,
                   const ft_corpus* gold, const char* target, const char* config_json,
                   char** json, char** text) {
  return guarded([&] {
    require(system_a, "system_a");
    require(system_b, "system_b");
    require(gold, "gold");
    require(target, "target");
    const auto c = config_from(config_json);
    const std::string task(facetag::kFaceActTask);
    const auto a = facetag::align_predictions(system_a->records, gold->corpus, task);
    const auto b = facetag::align_predictions(system_b->records, gold->corpus, task);

    std::unordered_map<std::string, const facetag::AlignedPrediction*> in_b;
    for (const auto& item : b.items) in_b.emplace(item.example_id, &item);
    if (in_b.size() != a.items.size()) {
      fail(ErrorCode::Validation, "systems scored different examples (" +
                                      std::to_string(a.items.size()) + " vs " +
                                      std::to_string(in_b.size()) + ")");
    }
    std::vector<std::string> g, pa, pb, tags;
    for (const auto& item : a.items) {
      auto it = in_b.find(item.example_id);
      if (it == in_b.end()) {
        fail(ErrorCode::Validation, "example " + item.example_id + " missing from second system");
      }
      if (!item.utterance->dialog_act) {
        fail(ErrorCode::Validation, "gold utterance " + item.example_id + " has no dialog_act");
      }
      g.push_back(item.gold);
      pa.push_back(item.predicted);
      pb.push_back(it->second->predicted);
      tags.push_back(item.utterance->dialog_act->name);
    }
    facetag::ShiftOptions o;
    o.target = target;
    o.subset = c.collapse_subset;
    // An inferred tagset carries no collapse map; keep the default one then.
    const auto& ts = gold->corpus.tagset();
    if (!c.collapse) {
      o.collapse_map.clear();
    } else if (ts && !ts->collapse_map().empty()) {
      o.collapse_map = ts->collapse_map();
    }
    const auto r = facetag::shift_analysis(g, pa, pb, tags, o);
    put_json(json, r.to_json());
    put(text, r.render());
  });
}

ft_status ft_levenshtein(const char* a, const char* b, size_t* out) {
  return guarded([&] {
    require(a, "a");
    require(b, "b");
    require(out, "out");
    *out = facetag::levenshtein(a, b);
  });
}

ft_status ft_repair_label(const char* raw, const char* labelset_json, const char* freqs_json,
                          char** record_json) {
  return guarded([&] {
    require(raw, "raw");
    require(record_json, "record_json");
    auto labelset = facetag::face_act_labelset();
    if (labelset_json) {
      labelset = parse_json_arg(labelset_json, "labelset").get<std::vector<std::string>>();
    }
    std::map<std::string, std::size_t> freqs;
    if (freqs_json) {
      freqs = parse_json_arg(freqs_json, "freqs").get<std::map<std::string, std::size_t>>();
    }
    put_json(record_json, facetag::prediction_to_json(facetag::repair_label(raw, labelset, freqs)));
  });
}

ft_status ft_chi2_sf(double x, int df, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = facetag::chi2_sf(x, df);
  });
}

ft_status ft_pearson(const double* xs, const double* ys, size_t n, double* out) {
  return guarded([&] {
    require(xs, "xs");
    require(ys, "ys");
    require(out, "out");
    *out = facetag::pearson({xs, n}, {ys, n});
  });
}

ft_status ft_phi(const int* x, const int* y, size_t n, double* out) {
  return guarded([&] {
    require(x, "x");
    require(y, "y");
    require(out, "out");
    *out = facetag::phi_correlation({x, n}, {y, n});
  });
}

ft_status ft_friedman(const double* values, size_t n, size_t k, const char* options_json,
                      char** result_json) {
  return guarded([&] {
    require(values, "values");
    require(result_json, "result_json");
    std::vector<std::vector<double>> rows(n);
    for (size_t i = 0; i < n; ++i) rows[i].assign(values + i * k, values + (i + 1) * k);
    facetag::FriedmanOptions o;
    const auto options = parse_json_arg(options_json, "options");
    if (options.is_object()) {
      if (options.contains("alpha_levels")) {
        o.alpha_levels = options.at("alpha_levels").get<std::vector<double>>();
      }
      o.exact = options.value("exact", false);
      o.permutation_draws = options.value("permutation_draws", o.permutation_draws);
      o.seed = options.value("seed", std::uint64_t{0});
    }
    put_json(result_json, facetag::friedman(facetag::BlockMatrix::from_rows(rows), o).to_json());
  });
}

}  // extern "C"
