#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "facetag/json.hpp"

namespace facetag {

struct ExternalRequest {
  std::string id;
  std::string task;  // "face acts" | "dialog acts"
  std::string input;
};

struct RawPrediction {
  std::string example_id;
  std::string output;

  bool operator==(const RawPrediction&) const = default;
};

struct ExternalPredictorConfig {
  enum class Mode { Subprocess, Files };

  Mode mode = Mode::Subprocess;
  // argv of the adapter. Required in subprocess mode; optional in file mode
  // (run once after the request file is written).
  std::vector<std::string> command;
  std::string requests_path;
  std::string responses_path;
  // Longest silence tolerated from the adapter, in milliseconds.
  int timeout_ms = 600000;
  // Maximum requests written ahead of received responses; 0 = unbounded.
  std::size_t window = 0;

  static ExternalPredictorConfig from_json(const Json& j);
  Json to_json() const;
};

// Wire format: one compact JSON object per LF-terminated line.
std::string encode_request(const ExternalRequest& request);

// Validates response lines against the request ids and returns predictions
// in request order. Throws Error(Protocol) for malformed lines, unknown or
// duplicate ids, and Error(MissingResponse) naming the first absent id.
std::vector<RawPrediction> match_responses(const std::vector<ExternalRequest>& requests,
                                           const std::vector<std::string>& response_lines);

// Sends every request to the configured adapter and collects one response
// per id. Raw outputs are returned unfiltered.
std::vector<RawPrediction> run_external(const std::vector<ExternalRequest>& requests,
                                        const ExternalPredictorConfig& config);

}  // namespace facetag
