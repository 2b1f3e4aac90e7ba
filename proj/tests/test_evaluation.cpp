#include <doctest.h>

#include <random>

#include "facetag/config.hpp"
#include "facetag/evaluation.hpp"
#include "facetag/example_builder.hpp"
#include "facetag/labels.hpp"
#include "test_support.hpp"

using namespace facetag;

namespace {

// Ten conversations of four turns over five folds, labels cycling.
Corpus fold_corpus() {
  std::string text;
  const auto labels = face_act_labelset();
  for (int c = 0; c < 10; ++c) {
    for (int t = 0; t < 4; ++t) {
      text += test::line("c" + std::to_string(c), t, t % 2 ? "EE" : "ER", "x",
                         labels[(c + t) % 4], t % 2 ? "Statement" : "Question", c % 5);
    }
  }
  return test::corpus_from(text);
}

std::vector<PredictionRecord> predictions(const Corpus& corpus, std::mt19937& rng, int accuracy_pct) {
  std::vector<PredictionRecord> out;
  const auto labels = face_act_labelset();
  for (const auto& c : corpus.conversations()) {
    for (const auto& u : c.utterances) {
      PredictionRecord p;
      p.example_id = example_id(c.id, u.turn);
      p.fold = *c.fold;
      const auto gold = std::string(to_string(*u.face_act));
      p.label = static_cast<int>(rng() % 100) < accuracy_pct ? gold : labels[rng() % 4];
      p.raw = p.label;
      out.push_back(p);
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("evaluation") {
  TEST_CASE("per-fold scores average to the reported mean") {
    auto corpus = fold_corpus();
    std::mt19937 rng(73);
    auto preds = predictions(corpus, rng, 60);
    auto e = evaluate(align_predictions(preds, corpus, kFaceActTask), face_act_labelset(),
                      kFaceActTask, {"spos-"});
    CHECK(e.folds == std::vector<int>{0, 1, 2, 3, 4});
    REQUIRE(e.per_fold.size() == 5);
    double micro = 0;
    for (const auto& r : e.per_fold) {
      CHECK(r.n == 8);
      micro += r.micro.f1;
    }
    CHECK(e.average.micro.f1 == doctest::Approx(micro / 5).epsilon(1e-12));
    CHECK(e.average.n == 40);
    CHECK(Evaluation::from_json(e.to_json()).to_json() == e.to_json());
  }

  TEST_CASE("cross-fold duplicates keep the lowest fold") {
    auto corpus = fold_corpus();
    std::mt19937 rng(79);
    auto preds = predictions(corpus, rng, 100);
    auto extra = preds[0];
    extra.fold = 3;
    preds.push_back(extra);
    auto a = align_predictions(preds, corpus, kFaceActTask);
    CHECK(a.items.size() == 40);
    CHECK(a.dropped == std::vector<std::string>{"c0:0@3"});

    auto repeat = preds[1];
    preds.push_back(repeat);
    CHECK(test::error_of([&] { align_predictions(preds, corpus, kFaceActTask); }).code() ==
          ErrorCode::Validation);
  }

  TEST_CASE("unknown utterances and unknown tasks") {
    auto corpus = fold_corpus();
    PredictionRecord p;
    p.example_id = "zz:0";
    p.label = "other";
    CHECK(test::error_of([&] { align_predictions({p}, corpus, kFaceActTask); }).code() ==
          ErrorCode::Validation);
    CHECK(test::error_of([&] { align_predictions({}, corpus, "sentiment"); }).code() ==
          ErrorCode::InvalidArgument);
  }

  TEST_CASE("dialog-act task scores against dialog-act gold") {
    auto corpus = fold_corpus();
    std::vector<PredictionRecord> preds;
    for (const auto& c : corpus.conversations()) {
      for (const auto& u : c.utterances) {
        PredictionRecord p;
        p.example_id = example_id(c.id, u.turn);
        p.fold = *c.fold;
        p.label = "Statement";
        preds.push_back(p);
      }
    }
    auto e = evaluate(align_predictions(preds, corpus, kDialogActTask),
                      task_labelset(corpus, kDialogActTask), kDialogActTask, {});
    CHECK(e.average.micro.f1 == doctest::Approx(0.5));
  }

  TEST_CASE("comparison levels") {
    auto corpus = fold_corpus();
    std::mt19937 rng(83);
    std::vector<Evaluation> systems;
    for (int acc : {90, 50, 20}) {
      systems.push_back(evaluate(align_predictions(predictions(corpus, rng, acc), corpus, kFaceActTask),
                                 face_act_labelset(), kFaceActTask, {"spos-"}));
    }
    const std::vector<std::string> names = {"good", "mid", "bad"};

    CompareOptions label;
    auto by_label = compare_systems(names, systems, label);
    CHECK(by_label.rows.size() == 4);
    for (const auto& row : by_label.rows) {
      CHECK(row.values.size() == 5);
      CHECK(row.result.k == 3);
    }

    CompareOptions agg;
    agg.level = CompareLevel::Aggregate;
    agg.aggregate = "micro";
    auto a = compare_systems(names, systems, agg);
    REQUIRE(a.rows.size() == 1);
    for (std::size_t f = 0; f < 5; ++f) {
      CHECK(a.rows[0].values[f][0] == systems[0].per_fold[f].micro.f1);
    }
    auto check = friedman(BlockMatrix::from_rows(a.rows[0].values));
    CHECK(a.rows[0].result.q == check.q);

    CompareOptions across;
    across.level = CompareLevel::AcrossLabels;
    auto x = compare_systems(names, systems, across);
    CHECK(x.rows[0].blocks.size() == 4);
    CHECK(x.to_json()["rows"].size() == 1);
    CHECK_FALSE(x.render().empty());

    CHECK(test::error_of([&] { compare_systems({"one"}, {systems[0]}, label); }).code() ==
          ErrorCode::Validation);
    CHECK(parse_compare_level("across-labels") == CompareLevel::AcrossLabels);
    CHECK(parse_compare_metric("recall") == CompareMetric::Recall);
  }
}

TEST_SUITE("config") {
  TEST_CASE("defaults") {
    auto c = RunConfig::from_json(Json::object());
    CHECK(c.context_size == 2);
    CHECK(c.sample_fraction == 0.10);
    CHECK(c.excluded_labels == std::vector<std::string>{"spos-"});
    CHECK(c.alpha_levels == std::vector<double>{0.05, 0.10});
    CHECK(RunConfig::from_json(c.to_json()).to_json() == c.to_json());
  }

  TEST_CASE("validation names the field") {
    auto unknown = test::error_of([] { RunConfig::from_json(Json::parse(R"({"contex":2})")); });
    CHECK(unknown.code() == ErrorCode::Validation);
    CHECK(std::string(unknown.what()).find("'contex'") != std::string::npos);
    auto range = test::error_of([] { RunConfig::from_json(Json::parse(R"({"sample_fraction":1.5})")); });
    CHECK(std::string(range.what()).find("'sample_fraction'") != std::string::npos);
    auto type = test::error_of([] { RunConfig::from_json(Json::parse(R"({"context_size":"two"})")); });
    CHECK(std::string(type.what()).find("'context_size'") != std::string::npos);
    CHECK(test::error_of([] { RunConfig::from_json(Json::parse(R"({"context_size":-1})")); }).code() ==
          ErrorCode::Validation);
  }

  TEST_CASE("overrides win over the file") {
    test::TempDir dir;
    test::spit(dir.file("c.json"), R"({"seed":7,"context_size":3})");
    auto c = resolve_config(dir.file("c.json"), Json::parse(R"({"seed":9})"));
    CHECK(c.seed == 9);
    CHECK(c.context_size == 3);
    CHECK(resolve_config(std::nullopt, Json::object()).seed == 0);
  }
}
