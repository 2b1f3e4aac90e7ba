#include <doctest.h>

#include <chrono>

#include "facetag/external.hpp"
#include "facetag/labels.hpp"
#include "facetag/predictor.hpp"
#include "test_support.hpp"

using namespace facetag;

namespace {

std::vector<ExternalRequest> requests(std::size_t n) {
  std::vector<ExternalRequest> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({"c:" + std::to_string(i), "face acts",
                   "ER: line one\nEE: answer word" + std::to_string(i)});
  }
  return out;
}

ExternalPredictorConfig adapter(const std::string& mode, int timeout_ms = 20000) {
  ExternalPredictorConfig c;
  c.command = {FAKE_ADAPTER_PATH, mode};
  c.timeout_ms = timeout_ms;
  return c;
}

}  // namespace

TEST_SUITE("external") {
  TEST_CASE("request lines are compact JSON") {
    CHECK(encode_request({"c:1", "face acts", "ER: hi\nEE: \"yo\""}) ==
          "{\"id\":\"c:1\",\"task\":\"face acts\",\"input\":\"ER: hi\\nEE: \\\"yo\\\"\"}\n");
  }

  TEST_CASE("responses are matched by id in any order") {
    auto reqs = requests(3);
    auto out = match_responses(reqs, {R"({"id":"c:2","output":"z"})", "",
                                      R"({"id":"c:0","output":"x"})",
                                      R"({"id":"c:1","output":"y"})"});
    REQUIRE(out.size() == 3);
    CHECK(out[0] == RawPrediction{"c:0", "x"});
    CHECK(out[2] == RawPrediction{"c:2", "z"});
  }

  TEST_CASE("protocol violations") {
    auto reqs = requests(2);
    CHECK(test::error_of([&] { match_responses(reqs, {"nope"}); }).code() == ErrorCode::Protocol);
    CHECK(test::error_of([&] { match_responses(reqs, {R"({"id":"c:9","output":""})"}); }).code() ==
          ErrorCode::Protocol);
    CHECK(test::error_of([&] {
            match_responses(reqs, {R"({"id":"c:0","output":""})", R"({"id":"c:0","output":""})"});
          }).code() == ErrorCode::Protocol);
    CHECK(test::error_of([&] { match_responses(reqs, {R"({"id":"c:0"})"}); }).code() ==
          ErrorCode::Protocol);
    auto missing = test::error_of([&] { match_responses(reqs, {R"({"id":"c:0","output":"a"})"}); });
    CHECK(missing.code() == ErrorCode::MissingResponse);
    CHECK(std::string(missing.what()) == "MissingResponse(\"c:1\")");
  }

  TEST_CASE("echo adapter answers every id") {
    auto reqs = requests(50);
    auto out = run_external(reqs, adapter("echo"));
    REQUIRE(out.size() == 50);
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(out[i].example_id == reqs[i].id);
      CHECK(out[i].output == "word" + std::to_string(i));
    }
  }

  TEST_CASE("large batches with a bounded window") {
    auto reqs = requests(1000);
    auto config = adapter("echo");
    config.window = 16;
    auto out = run_external(reqs, config);
    REQUIRE(out.size() == 1000);
    CHECK(out[999].output == "word999");
  }

  TEST_CASE("reversed responses after end of input") {
    auto out = run_external(requests(20), adapter("reverse"));
    CHECK(out[0].output == "word0");
    CHECK(out[19].output == "word19");
  }

  TEST_CASE("malformed label passes through and is repaired downstream") {
    auto reqs = requests(3);
    auto out = run_external(reqs, adapter("spos"));
    CHECK(out[0].output == "spos=");
    std::vector<Example> examples;
    for (const auto& r : reqs) examples.push_back(Example{r.id, r.input, "spos+", ExampleVariant::Fos, 0});
    auto spaces = repair_spaces_from(examples);
    auto repaired = repair_all(out, examples, spaces);
    CHECK(repaired[0].label == "spos+");
    CHECK(repaired[0].repaired);
  }

  TEST_CASE("adapter failures") {
    auto reqs = requests(4);
    auto omit = test::error_of([&] { run_external(reqs, adapter("omit")); });
    CHECK(omit.code() == ErrorCode::MissingResponse);
    CHECK(std::string(omit.what()).find("c:3") != std::string::npos);
    CHECK(test::error_of([&] { run_external(reqs, adapter("dup")); }).code() == ErrorCode::Protocol);
    CHECK(test::error_of([&] { run_external(reqs, adapter("garbage")); }).code() ==
          ErrorCode::Protocol);
    auto exit = test::error_of([&] { run_external(reqs, adapter("fail")); });
    CHECK(exit.code() == ErrorCode::Protocol);
    CHECK(std::string(exit.what()).find("status 3") != std::string::npos);
    CHECK(test::error_of([&] {
            run_external(reqs, ExternalPredictorConfig{ExternalPredictorConfig::Mode::Subprocess,
                                                       {"/nonexistent/adapter"}});
          }).code() != ErrorCode::Timeout);
    auto dup = requests(2);
    dup[1].id = dup[0].id;
    CHECK(test::error_of([&] { run_external(dup, adapter("echo")); }).code() ==
          ErrorCode::InvalidArgument);
  }

  TEST_CASE("silent adapter times out") {
    const auto start = std::chrono::steady_clock::now();
    auto e = test::error_of([&] { run_external(requests(2), adapter("hang", 300)); });
    CHECK(e.code() == ErrorCode::Timeout);
    CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(10));
  }

  TEST_CASE("file mode") {
    test::TempDir dir;
    ExternalPredictorConfig c;
    c.mode = ExternalPredictorConfig::Mode::Files;
    c.requests_path = dir.file("req.jsonl");
    c.responses_path = dir.file("resp.jsonl");
    c.command = {"/bin/sh", "-c",
                 std::string(FAKE_ADAPTER_PATH) + " reverse < " + c.requests_path + " > " +
                     c.responses_path};
    auto out = run_external(requests(5), c);
    CHECK(out[4].output == "word4");
    CHECK(test::slurp(c.requests_path) == [] {
      std::string s;
      for (const auto& r : requests(5)) s += encode_request(r);
      return s;
    }());
  }

  TEST_CASE("config parsing") {
    auto c = ExternalPredictorConfig::from_json(
        Json::parse(R"({"mode":"files","requests":"a","responses":"b","timeout_ms":5})"));
    CHECK(c.mode == ExternalPredictorConfig::Mode::Files);
    CHECK(ExternalPredictorConfig::from_json(c.to_json()).to_json() == c.to_json());
    CHECK(test::error_of([] { ExternalPredictorConfig::from_json(Json::parse(R"({"mode":"x"})")); })
              .code() == ErrorCode::Validation);
  }
}
