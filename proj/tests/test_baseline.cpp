#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "facetag/baseline.hpp"
#include "facetag/predictor.hpp"
#include "test_support.hpp"

using namespace facetag;

namespace {

Example ex(std::string id, std::string input, std::string target, int fold = 0) {
  Example e;
  e.id = std::move(id);
  e.input = std::move(input);
  e.target = std::move(target);
  e.fold = fold;
  return e;
}

const std::vector<Example> kHand = {ex("a:0", "donate please", "hneg-"),
                                    ex("b:0", "thank you", "hpos+")};

}  // namespace

TEST_SUITE("baseline") {
  TEST_CASE("tokenizer lowercases words and splits punctuation") {
    CHECK(tokenize("ER: Hello, World!") ==
          std::vector<std::string>{"er", ":", "hello", ",", "world", "!"});
    CHECK(tokenize("  ").empty());
  }

  TEST_CASE("hand-computed posteriors") {
    auto m = BaselineModel::train(kHand, 1.0);
    // vocabulary {donate, please, thank, you}; each class has two tokens, so
    // P(donate|hneg-) = 2/6 and P(donate|hpos+) = 1/6 with equal priors.
    const auto post = m.posterior("donate");
    const auto hneg = std::find(m.labels().begin(), m.labels().end(), "hneg-") - m.labels().begin();
    const auto hpos = std::find(m.labels().begin(), m.labels().end(), "hpos+") - m.labels().begin();
    CHECK(post[hneg] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(post[hpos] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(m.predict("donate") == "hneg-");
    CHECK(m.predict("thank") == "hpos+");
    CHECK(std::accumulate(post.begin(), post.end(), 0.0) == doctest::Approx(1.0));
  }

  TEST_CASE("single class and empty input") {
    auto single = BaselineModel::train({ex("a:0", "x y", "other"), ex("a:1", "z", "other")});
    CHECK(single.predict("anything at all") == "other");
    auto skewed = BaselineModel::train(
        {ex("a:0", "p", "hpos+"), ex("a:1", "q", "hpos+"), ex("a:2", "r", "other")});
    CHECK(skewed.predict("") == "hpos+");
  }

  TEST_CASE("posteriors sum to one on random data") {
    std::mt19937 rng(31);
    std::vector<Example> train;
    const auto labels = face_act_labelset();
    for (int i = 0; i < 200; ++i) {
      std::string input;
      for (int w = 0; w < 6; ++w) input += "w" + std::to_string(rng() % 40) + " ";
      train.push_back(ex("c:" + std::to_string(i), input, labels[rng() % labels.size()]));
    }
    auto m = BaselineModel::train(train);
    for (int i = 0; i < 50; ++i) {
      auto post = m.posterior("w" + std::to_string(rng() % 60) + " w3");
      CHECK(std::accumulate(post.begin(), post.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("training is deterministic and serialization is lossless") {
    auto a = BaselineModel::train(kHand);
    auto b = BaselineModel::train(kHand);
    CHECK(a.to_json().dump() == b.to_json().dump());
    test::TempDir dir;
    save_baseline(dir.file("m.json"), a);
    auto c = load_baseline(dir.file("m.json"));
    CHECK(c.to_json().dump() == a.to_json().dump());
    CHECK(c.log_scores("donate you") == a.log_scores("donate you"));
  }

  TEST_CASE("bad training input") {
    CHECK(test::error_of([] { BaselineModel::train({}); }).code() == ErrorCode::InvalidArgument);
    CHECK(test::error_of([] { BaselineModel::train(kHand, 0.0); }).code() ==
          ErrorCode::InvalidArgument);
  }

  TEST_CASE("cross-validation predicts every fold once, independent of threads") {
    std::mt19937 rng(37);
    std::vector<Example> examples;
    for (int i = 0; i < 300; ++i) {
      const bool pos = rng() % 2;
      examples.push_back(ex("c" + std::to_string(i) + ":0", pos ? "thanks great" : "please give",
                            pos ? "hpos+" : "hneg-", i % 5));
    }
    auto one = crossval_baseline(examples, 1.0, 1);
    auto four = crossval_baseline(examples, 1.0, 4);
    CHECK(one == four);
    REQUIRE(one.size() == examples.size());
    std::size_t correct = 0;
    for (std::size_t i = 0; i < one.size(); ++i) {
      for (const auto& e : examples) {
        if (e.id == one[i].example_id) {
          CHECK(e.fold == one[i].fold);
          correct += e.target == one[i].label;
        }
      }
    }
    CHECK(correct == examples.size());
    CHECK(folds_present(examples) == std::vector<int>{0, 1, 2, 3, 4});
  }
}
