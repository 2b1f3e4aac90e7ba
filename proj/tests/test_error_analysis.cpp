#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "facetag/error_analysis.hpp"
#include "facetag/labels.hpp"
#include "test_support.hpp"

using namespace facetag;

namespace {

ErrorSample annotated(const std::string& id, const std::string& gold, ErrorCategory c) {
  ErrorSample s;
  s.example_id = id;
  s.conversation_id = id.substr(0, id.find(':'));
  s.gold = gold;
  s.predicted = "other";
  s.category = c;
  return s;
}

std::vector<ScoredItem> random_items(std::mt19937& rng, std::size_t n) {
  const auto labels = face_act_labelset();
  std::vector<ScoredItem> items;
  for (std::size_t i = 0; i < n; ++i) {
    ScoredItem it;
    it.example_id = "c" + std::to_string(i / 10) + ":" + std::to_string(i % 10);
    it.fold = static_cast<int>((i / 10) % 5);
    it.text = "EE: utterance " + std::to_string(i);
    it.context = i % 10 ? "ER: before\tthat\nEE: \\ok" : "";
    it.gold = labels[rng() % 4];
    it.predicted = rng() % 2 ? it.gold : labels[rng() % labels.size()];
    items.push_back(std::move(it));
  }
  return items;
}

}  // namespace

TEST_SUITE("error-analysis") {
  TEST_CASE("category names parse loosely") {
    for (auto c : kAllErrorCategories) {
      CHECK(parse_error_category(to_string(c)) == c);
      CHECK(parse_error_category(display_name(c)) == c);
    }
    CHECK(parse_error_category("both happening (diff. part)") == ErrorCategory::BothHappeningDiffPart);
    CHECK_FALSE(parse_error_category("Maybe").has_value());
  }

  TEST_CASE("outcome cells") {
    CHECK(outcome("L", "L", "L") == OutcomeCell::TP);
    CHECK(outcome("L", "M", "L") == OutcomeCell::FN);
    CHECK(outcome("M", "L", "L") == OutcomeCell::FP);
    CHECK(outcome("M", "N", "L") == OutcomeCell::TN);
    CHECK(outcome("M", "M", "L") == OutcomeCell::TN);
  }

  TEST_CASE("hand-derived eight utterance shift fixture") {
    const std::vector<std::string> gold = {"hneg+", "hneg+", "other", "other",
                                           "hneg+", "hpos+", "hneg+", "hneg-"};
    const std::vector<std::string> a = {"other", "hneg+", "hneg+", "other",
                                        "hneg+", "hneg+", "other", "hpos+"};
    const std::vector<std::string> b = {"hneg+", "other", "other", "hneg+",
                                        "hneg+", "hpos+", "hneg+", "other"};
    const std::vector<std::string> tags = {"Statement", "Statement", "Question",  "Disruption",
                                           "Question",  "Statement", "Question", "BackChannel"};
    ShiftOptions options;
    options.target = "hneg+";
    auto r = shift_analysis(gold, a, b, tags, options);
    CHECK(r.total == 8);
    CHECK(r.unchanged == 2);

    const auto& fn_tp = r.cell(OutcomeCell::FN, OutcomeCell::TP).distribution;
    CHECK(fn_tp.count == 2);
    CHECK(fn_tp.percent.at("Statement") == 0.5);
    CHECK(fn_tp.percent.at("Question") == 0.5);

    const auto& tp_fn = r.cell(OutcomeCell::TP, OutcomeCell::FN).distribution;
    CHECK(tp_fn.count == 1);
    CHECK(tp_fn.percent.at("Statement") == 1.0);

    const auto& fp_tn = r.cell(OutcomeCell::FP, OutcomeCell::TN).distribution;
    CHECK(fp_tn.count == 2);
    CHECK(fp_tn.percent.at("Question") == 0.5);

    const auto& tn_fp = r.cell(OutcomeCell::TN, OutcomeCell::FP).distribution;
    CHECK(tn_fp.count == 1);
    CHECK(tn_fp.tags.at("Statement") == 1);  // Disruption collapsed
    CHECK(tn_fp.percent.at("Question") == 0.0);

    CHECK(r.overall.count == 8);
    CHECK(r.overall.covered == 7);
    CHECK(r.overall.percent.at("Statement") == doctest::Approx(4.0 / 7));
    CHECK(r.target_gold.count == 4);
    CHECK(r.target_gold.percent.at("Question") == 0.5);
  }

  TEST_CASE("identical predictions change nothing") {
    std::vector<std::string> g = {"a", "b", "a"}, p = {"a", "a", "b"}, t = {"Q", "S", "S"};
    ShiftOptions options;
    options.target = "a";
    auto r = shift_analysis(g, p, p, t, options);
    CHECK(r.unchanged == 3);
    for (const auto& c : r.cells) CHECK(c.distribution.count == 0);
  }

  TEST_CASE("cells and unchanged partition random prediction pairs") {
    std::mt19937 rng(61);
    const std::vector<std::string> labels = {"a", "b", "c"};
    for (int trial = 0; trial < 500; ++trial) {
      const std::size_t n = rng() % 40;
      std::vector<std::string> g(n), a(n), b(n), t(n);
      for (std::size_t i = 0; i < n; ++i) {
        g[i] = labels[rng() % 3];
        a[i] = labels[rng() % 3];
        b[i] = labels[rng() % 3];
        t[i] = rng() % 2 ? "Statement" : "Question";
      }
      ShiftOptions options;
      options.target = labels[rng() % 3];
      auto r = shift_analysis(g, a, b, t, options);
      std::size_t sum = r.unchanged;
      for (const auto& c : r.cells) sum += c.distribution.count;
      CHECK(sum == r.total);
    }
  }

  TEST_CASE("misaligned vectors") {
    ShiftOptions options;
    options.target = "a";
    CHECK(test::error_of([&] { shift_analysis({"a"}, {"a"}, {}, {"Q"}, options); }).code() ==
          ErrorCode::Validation);
  }

  TEST_CASE("hand-counted ten row sheet") {
    using C = ErrorCategory;
    const std::vector<ErrorSample> sheet = {
        annotated("a:1", "hneg+", C::PredictedOther),   annotated("a:2", "hneg+", C::GoldErrorCorrect),
        annotated("a:3", "hneg+", C::PredictedOther),   annotated("b:1", "hpos+", C::BothHappeningSamePart),
        annotated("b:2", "hpos+", C::NoIdea),           annotated("c:1", "other", C::GoldErrorIncorrect),
        annotated("c:2", "other", C::GoldErrorCorrect), annotated("c:3", "other", C::TrueForPrevious),
        annotated("d:1", "spos+", C::BothHappeningDiffPart), annotated("d:2", "spos+", C::PredictedOther),
    };
    auto t = tally_errors(sheet, face_act_labelset());
    CHECK(t.labels == std::vector<std::string>{"hneg+", "hpos+", "spos+", "other"});
    CHECK(t.total == 10);
    CHECK(t.row_totals == std::vector<std::size_t>{3, 2, 2, 3});
    CHECK(t.at("hneg+", C::PredictedOther) == 2);
    CHECK(t.at("other", C::GoldErrorCorrect) == 1);
    CHECK(t.column_totals == std::array<std::size_t, 7>{1, 1, 2, 1, 1, 3, 1});
    CHECK(t.gold_error_rate == doctest::Approx(0.3));
    CHECK(t.prediction_correct_rate == doctest::Approx(0.4));
  }

  TEST_CASE("all rows in one category") {
    std::vector<ErrorSample> sheet;
    for (int i = 0; i < 4; ++i) sheet.push_back(annotated("x:" + std::to_string(i), "hpos-", ErrorCategory::PredictedOther));
    auto t = tally_errors(sheet);
    for (auto c : kAllErrorCategories) {
      CHECK(t.column_totals[static_cast<std::size_t>(c)] == (c == ErrorCategory::PredictedOther ? 4u : 0u));
    }
  }

  TEST_CASE("reference category counts give the reference rates") {
    // rows: categories; columns: hneg+ hneg- hpos+ hpos- other sneg+ spos+ spos-
    const std::vector<std::string> cols = {"hneg+", "hneg-", "hpos+", "hpos-", "other", "sneg+", "spos+", "spos-"};
    const int counts[7][8] = {{5, 2, 3, 7, 0, 7, 5, 0},    {2, 3, 2, 5, 0, 1, 2, 2},
                              {3, 0, 3, 0, 18, 4, 5, 0},   {1, 0, 2, 1, 2, 0, 1, 1},
                              {3, 4, 1, 2, 3, 2, 2, 1},    {10, 13, 11, 5, 0, 8, 7, 1},
                              {1, 3, 3, 5, 2, 3, 3, 0}};
    std::vector<ErrorSample> sheet;
    for (std::size_t c = 0; c < 7; ++c) {
      for (std::size_t l = 0; l < cols.size(); ++l) {
        for (int i = 0; i < counts[c][l]; ++i) {
          sheet.push_back(annotated("s" + std::to_string(sheet.size()) + ":0", cols[l], kAllErrorCategories[c]));
        }
      }
    }
    auto t = tally_errors(sheet, face_act_labelset());
    CHECK(t.total == 180);
    CHECK(std::abs(t.gold_error_rate - 0.227) < 0.002);
    CHECK(std::abs(t.prediction_correct_rate - 0.438) < 0.002);
  }

  TEST_CASE("missing category names the row") {
    auto s = annotated("q:1", "other", ErrorCategory::NoIdea);
    s.category.reset();
    auto e = test::error_of([&] { tally_errors({annotated("q:0", "other", ErrorCategory::NoIdea), s}); });
    CHECK(e.code() == ErrorCode::Validation);
    CHECK(std::string(e.what()).find("row 2 (q:1)") != std::string::npos);
  }

  TEST_CASE("sampling bounds and determinism") {
    std::mt19937 rng(67);
    auto items = random_items(rng, 2000);
    SamplingPlan plan{5, 25, 99};
    auto a = sample_errors(items, face_act_labelset(), plan);
    auto b = sample_errors(items, face_act_labelset(), plan);
    CHECK(a == b);
    std::map<std::string, std::size_t> per_label;
    std::map<std::pair<std::string, int>, std::size_t> per_fold;
    std::set<std::string> ids;
    for (const auto& s : a) {
      CHECK(s.gold != s.predicted);
      CHECK(ids.insert(s.example_id).second);
      ++per_label[s.gold];
      ++per_fold[{s.gold, s.fold}];
    }
    for (const auto& [l, n] : per_label) CHECK(n == 25);  // every label has plenty of errors
    for (const auto& [k, n] : per_fold) CHECK(n <= 5);
    CHECK(sample_errors(items, face_act_labelset(), SamplingPlan{5, 25, 100}) != a);
  }

  TEST_CASE("one error per fold gives five samples") {
    std::vector<ScoredItem> items;
    for (int f = 0; f < 5; ++f) {
      items.push_back({"c" + std::to_string(f) + ":1", f, "", "EE: x", "spos-", "other"});
      items.push_back({"c" + std::to_string(f) + ":2", f, "", "EE: y", "spos-", "spos-"});
    }
    CHECK(sample_errors(items, face_act_labelset()).size() == 5);
  }

  TEST_CASE("sheets round-trip losslessly") {
    std::mt19937 rng(71);
    auto samples = sample_errors(random_items(rng, 400), face_act_labelset(), SamplingPlan{5, 25, 1});
    REQUIRE_FALSE(samples.empty());
    std::ostringstream out;
    write_annotation_sheet(out, samples);
    std::istringstream in(out.str());
    CHECK(read_annotation_sheet(in, false) == samples);

    for (std::size_t i = 0; i < samples.size(); ++i) samples[i].category = kAllErrorCategories[i % 7];
    test::TempDir dir;
    save_annotation_sheet(dir.file("s.tsv"), samples);
    CHECK(load_annotation_sheet(dir.file("s.tsv"), true) == samples);
  }

  TEST_CASE("sheet reader finds columns by header and reports bad rows") {
    std::istringstream in(
        "category\tgold\tpredicted\texample_id\n"
        "Predicted Other\thneg+\tother\tc:1\n"
        "bogus\thneg+\tother\tc:2\n");
    auto e = test::error_of([&] { read_annotation_sheet(in, true, "sheet.tsv"); });
    CHECK(e.code() == ErrorCode::Validation);
    CHECK(std::string(e.what()).find("sheet.tsv:3") != std::string::npos);

    std::istringstream ok("category\tgold\tpredicted\texample_id\nno idea\thneg+\tother\tc:7\n");
    auto rows = read_annotation_sheet(ok, true);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].conversation_id == "c");
    CHECK(rows[0].turn == 7);
    CHECK(rows[0].category == ErrorCategory::NoIdea);
  }

  TEST_CASE("join strips multi-task prefixes and splits context") {
    std::vector<Example> examples = {
        {"c:2", "face acts:\nER: a\nEE: b\nER: c", "hneg-", ExampleVariant::MtlFa, 1},
        {"d:0", "dialog acts:\nER: z", "Statement", ExampleVariant::MtlDa, kNoFold}};
    PredictionRecord p;
    p.example_id = "c:2";
    p.fold = 1;
    p.label = "other";
    auto items = join_scored(examples, {p});
    REQUIRE(items.size() == 1);
    CHECK(items[0].context == "ER: a\nEE: b");
    CHECK(items[0].text == "ER: c");
    CHECK(items[0].gold == "hneg-");
    CHECK(test::error_of([&] { join_scored(examples, {}); }).code() == ErrorCode::Validation);
  }
}
