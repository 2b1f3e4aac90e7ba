#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>

#include <nlohmann/json.hpp>

#include "facetag/facetag.h"
#include "test_support.hpp"

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  ft_free(s);
  return out;
}

std::string tiny_corpus() {
  std::string text;
  for (int c = 0; c < 10; ++c) {
    for (int t = 0; t < 3; ++t) {
      text += test::line("c" + std::to_string(c), t, t % 2 ? "EE" : "ER",
                         t % 2 ? "thank you so much" : "please donate now",
                         t % 2 ? "hpos+" : "hneg-", t == 2 ? "Question" : "Statement", c % 5);
    }
  }
  return text;
}

}  // namespace

TEST_SUITE("capi") {
  TEST_CASE("status names and errors") {
    CHECK(std::string(ft_status_name(FT_OK)) == "ok");
    CHECK(std::strlen(ft_version()) > 0);
    ft_corpus* c = nullptr;
    CHECK(ft_corpus_load("/nonexistent.jsonl", nullptr, &c) == FT_ERR_IO);
    CHECK(c == nullptr);
    CHECK(std::string(ft_last_error()).find("/nonexistent.jsonl") != std::string::npos);
    CHECK(ft_corpus_load(nullptr, nullptr, &c) == FT_ERR_INVALID_ARGUMENT);
    char* out = nullptr;
    CHECK(ft_config_resolve(nullptr, "{\"bogus\":1}", &out) == FT_ERR_VALIDATION);
    CHECK(ft_config_resolve(nullptr, "{not json", &out) == FT_ERR_PARSE);
  }

  TEST_CASE("full pipeline through handles") {
    test::TempDir dir;
    test::spit(dir.file("c.jsonl"), tiny_corpus());
    ft_corpus* corpus = nullptr;
    REQUIRE(ft_corpus_load(dir.file("c.jsonl").c_str(), nullptr, &corpus) == FT_OK);
    auto summary = nlohmann::json::parse(take([&] {
      char* s = nullptr;
      ft_corpus_summary(corpus, &s);
      return s;
    }()));
    CHECK(summary["utterances"] == 30);

    ft_examples* examples = nullptr;
    REQUIRE(ft_examples_build(corpus, "fos", 2, &examples) == FT_OK);
    CHECK(ft_examples_count(examples) == 30);
    ft_examples* bad = nullptr;
    CHECK(ft_examples_build(corpus, "nope", 2, &bad) == FT_ERR_VALIDATION);

    ft_predictions* preds = nullptr;
    REQUIRE(ft_predict_crossval(examples, 1.0, 2, &preds) == FT_OK);
    CHECK(ft_predictions_count(preds) == 30);

    char* json = nullptr;
    char* text = nullptr;
    REQUIRE(ft_evaluate(preds, corpus, "face acts", nullptr, &json, &text) == FT_OK);
    auto report = nlohmann::json::parse(take(json));
    CHECK(report["average"]["micro"]["f1"] == 1.0);
    CHECK(take(text).find("hneg-") != std::string::npos);

    const std::string r = report.dump();
    const char* names[] = {"a", "b"};
    const char* reports[] = {r.c_str(), r.c_str()};
    REQUIRE(ft_compare(names, reports, 2, R"({"level":"aggregate"})", &json, nullptr) == FT_OK);
    auto cmp = nlohmann::json::parse(take(json));
    CHECK(cmp["rows"][0]["friedman"]["p"] == 1.0);

    const int holdout = 0;
    ft_model* model = nullptr;
    REQUIRE(ft_model_train(examples, 1.0, &holdout, &model) == FT_OK);
    char* label = nullptr;
    REQUIRE(ft_model_predict_text(model, "ER: please donate", &label) == FT_OK);
    CHECK(take(label) == "hneg-");
    REQUIRE(ft_model_save(model, dir.file("m.json").c_str()) == FT_OK);

    ft_model_free(model);
    ft_predictions_free(preds);
    ft_examples_free(examples);
    ft_corpus_free(corpus);
  }

  TEST_CASE("primitives") {
    size_t d = 0;
    REQUIRE(ft_levenshtein("kitten", "sitting", &d) == FT_OK);
    CHECK(d == 3);
    double p = 0;
    REQUIRE(ft_chi2_sf(10.0, 2, &p) == FT_OK);
    CHECK(std::abs(p - std::exp(-5.0)) < 1e-12);
    CHECK(ft_chi2_sf(1.0, 0, &p) == FT_ERR_INVALID_ARGUMENT);
    char* record = nullptr;
    REQUIRE(ft_repair_label("sneg", nullptr, R"({"sneg+":259,"sneg-":0})", &record) == FT_OK);
    CHECK(nlohmann::json::parse(take(record))["label"] == "sneg+");
    const double values[] = {0.1, 0.5, 0.9, 0.1, 0.5, 0.9, 0.1, 0.5, 0.9, 0.1, 0.5, 0.9, 0.1, 0.5, 0.9};
    char* result = nullptr;
    REQUIRE(ft_friedman(values, 5, 3, nullptr, &result) == FT_OK);
    auto j = nlohmann::json::parse(take(result));
    CHECK(j["Q"].get<double>() == doctest::Approx(10.0));
    CHECK(j["W"].get<double>() == doctest::Approx(1.0));
    const int x[] = {1, 1, 0, 0}, y[] = {0, 0, 1, 1};
    REQUIRE(ft_phi(x, y, 4, &p) == FT_OK);
    CHECK(p == doctest::Approx(-1.0));
    const double xs[] = {1, 2, 3}, ys[] = {2, 4, 7};
    REQUIRE(ft_pearson(xs, ys, 3, &p) == FT_OK);
    CHECK(p > 0.99);
  }
}
