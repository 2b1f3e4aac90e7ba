#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "facetag/json.hpp"

namespace facetag {

// Every knob of a run. Defaults: context 2, sample fraction 0.10, macro
// exclusion {spos-}, significance levels {0.05, 0.10}.
struct RunConfig {
  std::optional<std::string> tagset_registry;
  std::optional<std::string> tagset_id;
  Json format;  // FormatSpec object for delimited input, or null for JSONL
  std::map<std::string, std::string> role_map;
  int fold_count = 5;
  bool dedupe = true;

  std::string variant = "fos";
  int context_size = 2;
  std::uint64_t seed = 0;
  double sample_fraction = 0.10;

  std::string predictor = "baseline";  // "baseline" | "external"
  double alpha = 1.0;
  Json external;  // ExternalPredictorConfig object, or null

  std::vector<std::string> excluded_labels = {"spos-"};
  std::vector<double> alpha_levels = {0.05, 0.10};
  bool exact_p = false;
  std::size_t permutation_draws = 10000;

  std::vector<std::string> collapse_subset = {"Statement", "Question"};
  bool collapse = true;

  std::size_t errors_per_fold = 5;
  std::size_t errors_cap = 25;

  int jobs = 1;

  // Starts from the defaults and applies the fields present in j. Unknown
  // fields and ill-typed or out-of-range values are Error(Validation) naming
  // the field.
  static RunConfig from_json(const Json& j);
  Json to_json() const;
};

// Config file (may be empty) overlaid with flag overrides; overrides win.
RunConfig resolve_config(const std::optional<std::string>& path, const Json& overrides);

}  // namespace facetag
