// Command-line front end. Talks to the library only through facetag.h.
#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "facetag/facetag.h"

namespace {

using Json = nlohmann::ordered_json;

struct Failure {
  ft_status status;
  std::string message;
};

// 1 for bad input, 2 for I/O and adapter failures.
int exit_code_for(ft_status s) {
  switch (s) {
    case FT_OK: return 0;
    case FT_ERR_IO:
    case FT_ERR_PROTOCOL:
    case FT_ERR_TIMEOUT:
    case FT_ERR_MISSING_RESPONSE: return 2;
    default: return 1;
  }
}

void check(ft_status s) {
  if (s != FT_OK) throw Failure{s, ft_last_error()};
}

std::string take(char* p) {
  std::string s = p ? p : "";
  ft_free(p);
  return s;
}

struct Deleter {
  void operator()(ft_corpus* p) const { ft_corpus_free(p); }
  void operator()(ft_examples* p) const { ft_examples_free(p); }
  void operator()(ft_model* p) const { ft_model_free(p); }
  void operator()(ft_predictions* p) const { ft_predictions_free(p); }
};
template <typename T>
using Handle = std::unique_ptr<T, Deleter>;

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  bool no_timestamp = false;
  Json overrides = Json::object();
};

std::string resolve(const Globals& g) {
  Json overrides = g.overrides;
  if (g.seed) overrides["seed"] = *g.seed;
  if (g.jobs) overrides["jobs"] = *g.jobs;
  char* out = nullptr;
  check(ft_config_resolve(g.config_path.empty() ? nullptr : g.config_path.c_str(),
                          overrides.dump().c_str(), &out));
  return take(out);
}

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{FT_ERR_IO, "cannot open " + path};
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Failure{FT_ERR_IO, "cannot write " + path};
}

Json parse(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Failure{FT_ERR_PARSE, what + ": " + e.what()};
  }
}

// Report sink shared by the analysis commands: JSON document to --output or
// stdout, or the rendered table with --text.
struct Sink {
  std::string output;
  bool text = false;
};

void emit(const Globals& g, const std::string& command, const std::string& config,
          const Json& result, const Sink& sink = {}, const std::string& table = {}) {
  Json doc;
  doc["command"] = command;
  if (!g.no_timestamp) doc["generated_at"] = now_utc();
  doc["config"] = parse(config, "config");
  doc["result"] = result;
  const auto text = doc.dump(2) + "\n";
  if (!sink.output.empty()) write_file(sink.output, text);
  if (sink.text) {
    std::cout << table;
  } else if (sink.output.empty()) {
    std::cout << text;
  }
}

Handle<ft_corpus> load_corpus(const std::string& path, const std::string& config) {
  ft_corpus* c = nullptr;
  check(ft_corpus_load(path.c_str(), config.c_str(), &c));
  return Handle<ft_corpus>(c);
}

Handle<ft_predictions> load_predictions(const std::string& path) {
  ft_predictions* p = nullptr;
  check(ft_predictions_load(path.c_str(), &p));
  return Handle<ft_predictions>(p);
}

Handle<ft_examples> load_examples(const std::string& path) {
  ft_examples* e = nullptr;
  check(ft_examples_load(path.c_str(), &e));
  return Handle<ft_examples>(e);
}

// Applies dedupe when the resolved config asks for it; returns the report.
Json maybe_dedupe(Handle<ft_corpus>& corpus, const Json& config) {
  if (!config.value("dedupe", true)) return nullptr;
  ft_corpus* deduped = nullptr;
  char* report = nullptr;
  check(ft_corpus_dedupe(corpus.get(), &deduped, &report));
  corpus.reset(deduped);
  return parse(take(report), "dedupe report");
}

void add_sink(CLI::App* cmd, Sink& sink) {
  cmd->add_option("--output,-o", sink.output, "Write the JSON report to this file");
  cmd->add_flag("--text", sink.text, "Print a plain-text table instead of JSON");
}

void add_corpus_flags(CLI::App* cmd, Globals& g) {
  cmd->add_option_function<std::string>(
      "--format", [&g](const std::string& path) { g.overrides["format"] = parse(read_file(path), path); },
      "FormatSpec JSON for delimited input");
  cmd->add_option_function<std::string>(
      "--tagset-registry", [&g](const std::string& v) { g.overrides["tagset_registry"] = v; },
      "Tagset registry JSON");
  cmd->add_option_function<std::string>(
      "--tagset-id", [&g](const std::string& v) { g.overrides["tagset_id"] = v; },
      "Tagset id within the registry");
  cmd->add_flag_callback("--no-dedupe", [&g] { g.overrides["dedupe"] = false; },
                         "Keep conversations duplicated across folds");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Face-act tagging experiment harness"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ft_version());

  Globals g;
  app.add_option("--config", g.config_path, "Run configuration JSON");
  app.add_option("--seed", g.seed, "Seed for every random choice");
  app.add_option("--jobs", g.jobs, "Worker threads for fold-parallel work");
  app.add_flag("--no-timestamp", g.no_timestamp, "Omit generated_at from reports");

  std::function<void()> action;

  // import
  std::string import_input, import_output;
  auto* import_cmd = app.add_subcommand("import", "Parse, validate and summarize a corpus");
  import_cmd->add_option("--input,-i", import_input, "Corpus file (JSONL or delimited)")->required();
  import_cmd->add_option("--output,-o", import_output, "Write the canonical JSONL corpus here");
  add_corpus_flags(import_cmd, g);
  import_cmd->callback([&] {
    action = [&] {
      const auto config = resolve(g);
      auto corpus = load_corpus(import_input, config);
      Json result;
      result["dedupe"] = maybe_dedupe(corpus, parse(config, "config"));
      char* summary = nullptr;
      check(ft_corpus_summary(corpus.get(), &summary));
      result["summary"] = parse(take(summary), "summary");
      if (!import_output.empty()) {
        check(ft_corpus_save(corpus.get(), import_output.c_str()));
        result["output"] = import_output;
      }
      emit(g, "import", config, result);
    };
  });

  // prepare
  std::string prep_corpus, prep_da_corpus, prep_output;
  auto* prep = app.add_subcommand("prepare", "Build examples in one input variant");
  prep->add_option("--corpus", prep_corpus, "Face-act corpus")->required();
  prep->add_option("--output,-o", prep_output, "Examples JSONL")->required();
  prep->add_option_function<std::string>(
      "--variant", [&g](const std::string& v) { g.overrides["variant"] = v; },
      "fos | ta | mtl-fa | mtl-da");
  prep->add_option_function<int>(
      "--context", [&g](int v) { g.overrides["context_size"] = v; }, "Preceding turns per input");
  prep->add_option("--da-corpus", prep_da_corpus, "Dialog-act corpus mixed into mtl-fa examples");
  prep->add_option_function<double>(
      "--fraction", [&g](double v) { g.overrides["sample_fraction"] = v; },
      "Share of dialog-act conversations to mix in");
  add_corpus_flags(prep, g);
  prep->callback([&] {
    action = [&] {
      const auto config = resolve(g);
      const auto cfg = parse(config, "config");
      auto corpus = load_corpus(prep_corpus, config);
      Json result;
      result["dedupe"] = maybe_dedupe(corpus, cfg);
      const auto variant = cfg.at("variant").get<std::string>();
      const int context = cfg.at("context_size").get<int>();
      ft_examples* built = nullptr;
      check(ft_examples_build(corpus.get(), variant.c_str(), context, &built));
      Handle<ft_examples> examples(built);
      result["mix"] = nullptr;
      if (!prep_da_corpus.empty()) {
        if (variant != "mtl-fa") {
          throw Failure{FT_ERR_VALIDATION, "--da-corpus needs --variant mtl-fa"};
        }
        // Dialog-act corpora carry their own tagset; reuse only speaker mapping.
        Json da_config = cfg;
        da_config["tagset_registry"] = nullptr;
        da_config["tagset_id"] = nullptr;
        da_config["format"] = nullptr;
        da_config["fold_count"] = 0;
        auto da = load_corpus(prep_da_corpus, da_config.dump());
        ft_examples* mixed = nullptr;
        char* report = nullptr;
        check(ft_examples_mix(examples.get(), da.get(), cfg.at("sample_fraction").get<double>(),
                              cfg.at("seed").get<std::uint64_t>(), context, &mixed, &report));
        examples.reset(mixed);
        result["mix"] = parse(take(report), "mix report");
      }
      check(ft_examples_save(examples.get(), prep_output.c_str()));
      result["variant"] = variant;
      result["examples"] = ft_examples_count(examples.get());
      result["output"] = prep_output;
      emit(g, "prepare", config, result);
    };
  });

  // train-baseline
  std::string train_examples, train_output;
  std::optional<int> holdout;
  auto* train = app.add_subcommand("train-baseline", "Train the naive Bayes baseline");
  train->add_option("--examples", train_examples, "Examples JSONL")->required();
  train->add_option("--output,-o", train_output, "Model JSON")->required();
  train->add_option_function<double>(
      "--alpha", [&g](double v) { g.overrides["alpha"] = v; }, "Additive smoothing");
  train->add_option("--holdout-fold", holdout, "Leave this fold out of training");
  train->callback([&] {
    action = [&] {
      const auto config = resolve(g);
      const auto cfg = parse(config, "config");
      auto examples = load_examples(train_examples);
      ft_model* model = nullptr;
      const int fold = holdout.value_or(0);
      check(ft_model_train(examples.get(), cfg.at("alpha").get<double>(),
                           holdout ? &fold : nullptr, &model));
      Handle<ft_model> owned(model);
      check(ft_model_save(model, train_output.c_str()));
      char* summary = nullptr;
      check(ft_model_summary(model, &summary));
      Json result = parse(take(summary), "model summary");
      result["output"] = train_output;
      emit(g, "train-baseline", config, result);
    };
  });

  // predict
  std::string pred_examples, pred_output, pred_model, pred_endpoint, pred_train;
  auto* pred = app.add_subcommand("predict", "Predict and repair labels");
  pred->add_option("--examples", pred_examples, "Examples JSONL to label")->required();
  pred->add_option("--output,-o", pred_output, "Predictions JSONL")->required();
  pred->add_option("--model", pred_model, "Trained baseline; without it, baseline runs cross-validated");
  pred->add_option_function<std::string>(
      "--predictor", [&g](const std::string& v) { g.overrides["predictor"] = v; },
      "baseline | external");
  pred->add_option("--endpoint", pred_endpoint, "External predictor config JSON");
  pred->add_option("--train", pred_train, "Training examples for repair tie-breaks (external)");
  pred->callback([&] {
    action = [&] {
      if (!pred_endpoint.empty()) g.overrides["predictor"] = "external";
      const auto config = resolve(g);
      const auto cfg = parse(config, "config");
      auto examples = load_examples(pred_examples);
      ft_predictions* raw = nullptr;
      std::string mode;
      if (cfg.at("predictor") == "external") {
        Json endpoint = cfg.at("external");
        if (!pred_endpoint.empty()) endpoint = parse(read_file(pred_endpoint), pred_endpoint);
        if (!endpoint.is_object()) {
          throw Failure{FT_ERR_VALIDATION, "external predictor needs --endpoint or config 'external'"};
        }
        Handle<ft_examples> train_set;
        if (!pred_train.empty()) train_set = load_examples(pred_train);
        check(ft_predict_external(examples.get(), train_set.get(), endpoint.dump().c_str(), &raw));
        mode = "external";
      } else if (!pred_model.empty()) {
        ft_model* model = nullptr;
        check(ft_model_load(pred_model.c_str(), &model));
        Handle<ft_model> owned(model);
        check(ft_predict_baseline(model, examples.get(), &raw));
        mode = "baseline";
      } else {
        check(ft_predict_crossval(examples.get(), cfg.at("alpha").get<double>(),
                                  cfg.at("jobs").get<int>(), &raw));
        mode = "baseline-crossval";
      }
      Handle<ft_predictions> predictions(raw);
      check(ft_predictions_save(raw, pred_output.c_str()));
      char* summary = nullptr;
      check(ft_predictions_summary(raw, &summary));
      Json result = parse(take(summary), "prediction summary");
      result["mode"] = mode;
      result["output"] = pred_output;
      emit(g, "predict", config, result);
    };
  });

  // evaluate
  std::string eval_pred, eval_gold, eval_task = "face acts";
  Sink eval_sink;
  auto* eval = app.add_subcommand("evaluate", "Fold-averaged precision, recall and F1");
  eval->add_option("--pred", eval_pred, "Predictions JSONL")->required();
  eval->add_option("--gold", eval_gold, "Gold corpus")->required();
  eval->add_option("--task", eval_task, "face acts | dialog acts");
  eval->add_option_function<std::vector<std::string>>(
      "--exclude", [&g](const std::vector<std::string>& v) { g.overrides["excluded_labels"] = v; },
      "Labels dropped from the extra macro averages");
  add_corpus_flags(eval, g);
  add_sink(eval, eval_sink);
  eval->callback([&] {
    action = [&] {
      const auto config = resolve(g);
      auto gold = load_corpus(eval_gold, config);
      auto predictions = load_predictions(eval_pred);
      char* json = nullptr;
      char* text = nullptr;
      check(ft_evaluate(predictions.get(), gold.get(), eval_task.c_str(), config.c_str(), &json,
                        &text));
      emit(g, "evaluate", config, parse(take(json), "evaluation"), eval_sink, take(text));
    };
  });

  // compare
  std::vector<std::string> cmp_reports, cmp_names;
  std::string cmp_metric = "f1", cmp_level = "label", cmp_aggregate = "macro";
  Sink cmp_sink;
  auto* cmp = app.add_subcommand("compare", "Friedman test and Kendall's W across systems");
  cmp->add_option("--reports", cmp_reports, "Evaluation reports, one per system")->required();
  cmp->add_option("--names", cmp_names, "System names (default: file names)");
  cmp->add_option("--metric", cmp_metric, "f1 | precision | recall");
  cmp->add_option("--level", cmp_level, "label | aggregate | across-labels");
  cmp->add_option("--aggregate", cmp_aggregate, "macro | micro (aggregate level)");
  cmp->add_flag_callback("--exact", [&g] { g.overrides["exact_p"] = true; },
                         "Permutation p-value instead of chi-square");
  cmp->add_option_function<std::vector<double>>(
      "--alpha-levels", [&g](const std::vector<double>& v) { g.overrides["alpha_levels"] = v; },
      "Significance levels");
  add_sink(cmp, cmp_sink);
  cmp->callback([&] {
    action = [&] {
      const auto config = resolve(g);
      if (!cmp_names.empty() && cmp_names.size() != cmp_reports.size()) {
        throw Failure{FT_ERR_VALIDATION, "--names must match --reports in number"};
      }
      std::vector<std::string> names, docs;
      for (std::size_t i = 0; i < cmp_reports.size(); ++i) {
        auto doc = parse(read_file(cmp_reports[i]), cmp_reports[i]);
        if (doc.contains("result")) doc = doc.at("result");
        docs.push_back(doc.dump());
        if (!cmp_names.empty()) {
          names.push_back(cmp_names[i]);
        } else {
          auto base = cmp_reports[i].substr(cmp_reports[i].find_last_of('/') + 1);
          names.push_back(base.substr(0, base.find('.')));
        }
      }
      std::vector<const char*> name_ptrs, doc_ptrs;
      for (std::size_t i = 0; i < docs.size(); ++i) {
        name_ptrs.push_back(names[i].c_str());
        doc_ptrs.push_back(docs[i].c_str());
      }
      Json options = parse(config, "config");
      options["metric"] = cmp_metric;
      options["level"] = cmp_level;
      options["aggregate"] = cmp_aggregate;
      char* json = nullptr;
      char* text = nullptr;
      check(ft_compare(name_ptrs.data(), doc_ptrs.data(), docs.size(), options.dump().c_str(),
                       &json, &text));
      emit(g, "compare", config, parse(take(json), "comparison"), cmp_sink, take(text));
    };
  });

  // correlate
  std::string corr_corpus, corr_report;
  Sink corr_sink;
  auto* corr = app.add_subcommand("correlate", "Dialog-act by face-act phi, or support vs F1");
  corr->add_option("--corpus", corr_corpus, "Corpus with dialog-act and face-act labels");
  corr->add_option("--report", corr_report, "Evaluation report (support vs F1 Pearson)");
  add_corpus_flags(corr, g);
  add_sink(corr, corr_sink);
  corr->callback([&] {
    action = [&] {
      const auto config = resolve(g);
      if (corr_corpus.empty() == corr_report.empty()) {
        throw Failure{FT_ERR_VALIDATION, "correlate needs exactly one of --corpus or --report"};
      }
      char* json = nullptr;
      char* text = nullptr;
      if (!corr_corpus.empty()) {
        auto corpus = load_corpus(corr_corpus, config);
        auto cfg = parse(config, "config");
        maybe_dedupe(corpus, cfg);
        check(ft_corpus_correlate(corpus.get(), &json, &text));
      } else {
        auto doc = parse(read_file(corr_report), corr_report);
        if (doc.contains("result")) doc = doc.at("result");
        check(ft_correlate_report(doc.dump().c_str(), &json, &text));
      }
      emit(g, "correlate", config, parse(take(json), "correlation"), corr_sink, take(text));
    };
  });

  // confusion
  std::string conf_pred, conf_gold, conf_task = "face acts";
  bool conf_normalized = false;
  Sink conf_sink;
  auto* conf = app.add_subcommand("confusion", "Pooled confusion matrix");
  conf->add_option("--pred", conf_pred, "Predictions JSONL")->required();
  conf->add_option("--gold", conf_gold, "Gold corpus")->required();
  conf->add_option("--task", conf_task, "face acts | dialog acts");
  conf->add_flag("--normalized", conf_normalized, "Row-normalized table");
  add_corpus_flags(conf, g);
  add_sink(conf, conf_sink);
  conf->callback([&] {
    action = [&] {
      const auto config = resolve(g);
      auto gold = load_corpus(conf_gold, config);
      auto predictions = load_predictions(conf_pred);
      char* json = nullptr;
      char* text = nullptr;
      check(ft_confusion(predictions.get(), gold.get(), conf_task.c_str(), conf_normalized ? 1 : 0,
                         &json, &text));
      emit(g, "confusion", config, parse(take(json), "confusion"), conf_sink, take(text));
    };
  });

  // sample-errors
  std::string se_pred, se_gold, se_examples, se_output;
  auto* se = app.add_subcommand("sample-errors", "Draw misclassifications into an annotation sheet");
  se->add_option("--pred", se_pred, "Predictions JSONL")->required();
  se->add_option("--examples", se_examples, "Examples the predictions were made on");
  se->add_option("--gold", se_gold, "Gold corpus (examples rebuilt as fos)");
  se->add_option("--output,-o", se_output, "Annotation sheet TSV")->required();
  se->add_option_function<std::size_t>(
      "--per-fold", [&g](std::size_t v) { g.overrides["errors_per_fold"] = v; },
      "Samples per label and fold");
  se->add_option_function<std::size_t>(
      "--cap", [&g](std::size_t v) { g.overrides["errors_cap"] = v; }, "Samples per label");
  add_corpus_flags(se, g);
  se->callback([&] {
    action = [&] {
      const auto config = resolve(g);
      if (se_examples.empty() == se_gold.empty()) {
        throw Failure{FT_ERR_VALIDATION, "sample-errors needs exactly one of --examples or --gold"};
      }
      Handle<ft_examples> examples;
      if (!se_examples.empty()) {
        examples = load_examples(se_examples);
      } else {
        const auto cfg = parse(config, "config");
        auto corpus = load_corpus(se_gold, config);
        maybe_dedupe(corpus, cfg);
        ft_examples* built = nullptr;
        check(ft_examples_build(corpus.get(), "fos", cfg.at("context_size").get<int>(), &built));
        examples.reset(built);
      }
      auto predictions = load_predictions(se_pred);
      char* json = nullptr;
      check(ft_sample_errors(predictions.get(), examples.get(), config.c_str(), se_output.c_str(),
                             &json));
      emit(g, "sample-errors", config, parse(take(json), "sampling"));
    };
  });

  // tally-errors
  std::string tally_sheet;
  Sink tally_sink;
  auto* tally = app.add_subcommand("tally-errors", "Count annotated error categories");
  tally->add_option("--sheet", tally_sheet, "Annotated sheet TSV")->required();
  add_sink(tally, tally_sink);
  tally->callback([&] {
    action = [&] {
      const auto config = resolve(g);
      char* json = nullptr;
      char* text = nullptr;
      check(ft_tally_errors(tally_sheet.c_str(), &json, &text));
      emit(g, "tally-errors", config, parse(take(json), "tally"), tally_sink, take(text));
    };
  });

  // shift
  std::string shift_a, shift_b, shift_gold, shift_target;
  Sink shift_sink;
  auto* shift = app.add_subcommand("shift", "Outcome shifts for one label between two systems");
  shift->add_option("--pred-a", shift_a, "Predictions of the first system")->required();
  shift->add_option("--pred-b", shift_b, "Predictions of the second system")->required();
  shift->add_option("--gold", shift_gold, "Gold corpus with dialog acts")->required();
  shift->add_option("--target", shift_target, "Face-act label")->required();
  shift->add_option_function<std::vector<std::string>>(
      "--subset", [&g](const std::vector<std::string>& v) { g.overrides["collapse_subset"] = v; },
      "Collapsed tags to report");
  shift->add_flag_callback("--all-tags", [&g] { g.overrides["collapse_subset"] = Json::array(); },
                           "Report every tag");
  shift->add_flag_callback("--no-collapse", [&g] { g.overrides["collapse"] = false; },
                           "Ignore the tagset collapse map");
  add_corpus_flags(shift, g);
  add_sink(shift, shift_sink);
  shift->callback([&] {
    action = [&] {
      const auto config = resolve(g);
      auto gold = load_corpus(shift_gold, config);
      auto a = load_predictions(shift_a);
      auto b = load_predictions(shift_b);
      char* json = nullptr;
      char* text = nullptr;
      check(ft_shift(a.get(), b.get(), gold.get(), shift_target.c_str(), config.c_str(), &json,
                     &text));
      emit(g, "shift", config, parse(take(json), "shift"), shift_sink, take(text));
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (action) action();
  } catch (const Failure& f) {
    std::cerr << "error (" << ft_status_name(f.status) << "): " << f.message << '\n';
    return exit_code_for(f.status);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error (parse): " << e.what() << '\n';
    return 1;
  }
  return 0;
}
