#include "facetag/config.hpp"

#include <cmath>
#include <set>
#include <type_traits>

#include "facetag/error.hpp"
#include "facetag/example_builder.hpp"

namespace facetag {

namespace {

[[noreturn]] void bad_field(const std::string& key, const std::string& what) {
  fail(ErrorCode::Validation, "config field '" + key + "': " + what);
}

template <typename T>
T get_as(const Json& j, const std::string& key, const char* expected) {
  if constexpr (std::is_same_v<T, std::size_t>) {
    if (!j.is_number_unsigned()) bad_field(key, std::string("expected ") + expected);
  } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
    if (!j.is_number_integer()) bad_field(key, std::string("expected ") + expected);
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!j.is_number()) bad_field(key, std::string("expected ") + expected);
  }
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    bad_field(key, std::string("expected ") + expected);
  }
}

}  // namespace

RunConfig RunConfig::from_json(const Json& j) {
  if (!j.is_object() && !j.is_null()) fail(ErrorCode::Validation, "config must be a JSON object");
  RunConfig c;
  if (j.is_null()) return c;

  for (const auto& [key, v] : j.items()) {
    auto optional_string = [&](std::optional<std::string>& out) {
      if (v.is_null()) {
        out.reset();
      } else {
        out = get_as<std::string>(v, key, "a string or null");
      }
    };
    if (key == "tagset_registry") {
      optional_string(c.tagset_registry);
    } else if (key == "tagset_id") {
      optional_string(c.tagset_id);
    } else if (key == "format") {
      if (!v.is_null() && !v.is_object()) bad_field(key, "expected an object or null");
      c.format = v;
    } else if (key == "role_map") {
      c.role_map = get_as<std::map<std::string, std::string>>(v, key, "an object of strings");
      for (const auto& [from, to] : c.role_map) {
        if (to != "ER" && to != "EE") bad_field(key, "'" + from + "' must map to ER or EE");
      }
    } else if (key == "fold_count") {
      c.fold_count = get_as<int>(v, key, "an integer");
      if (c.fold_count < 0) bad_field(key, "must be >= 0");
    } else if (key == "dedupe") {
      c.dedupe = get_as<bool>(v, key, "a boolean");
    } else if (key == "variant") {
      c.variant = get_as<std::string>(v, key, "a string");
      if (!parse_variant(c.variant)) bad_field(key, "unknown variant '" + c.variant + "'");
      c.variant = std::string(to_string(*parse_variant(c.variant)));
    } else if (key == "context_size") {
      c.context_size = get_as<int>(v, key, "an integer");
      if (c.context_size < 0) bad_field(key, "must be >= 0");
    } else if (key == "seed") {
      if (!v.is_number_integer()) bad_field(key, "expected a non-negative integer");
      if (v.is_number_unsigned()) {
        c.seed = v.get<std::uint64_t>();
      } else {
        const auto s = v.get<std::int64_t>();
        if (s < 0) bad_field(key, "expected a non-negative integer");
        c.seed = static_cast<std::uint64_t>(s);
      }
    } else if (key == "sample_fraction") {
      c.sample_fraction = get_as<double>(v, key, "a number");
      if (!(c.sample_fraction > 0.0 && c.sample_fraction <= 1.0)) bad_field(key, "must be in (0, 1]");
    } else if (key == "predictor") {
      c.predictor = get_as<std::string>(v, key, "a string");
      if (c.predictor != "baseline" && c.predictor != "external") {
        bad_field(key, "must be 'baseline' or 'external'");
      }
    } else if (key == "alpha") {
      c.alpha = get_as<double>(v, key, "a number");
      if (!(c.alpha > 0.0) || !std::isfinite(c.alpha)) bad_field(key, "must be > 0");
    } else if (key == "external") {
      if (!v.is_null() && !v.is_object()) bad_field(key, "expected an object or null");
      c.external = v;
    } else if (key == "excluded_labels") {
      c.excluded_labels = get_as<std::vector<std::string>>(v, key, "an array of strings");
    } else if (key == "alpha_levels") {
      c.alpha_levels = get_as<std::vector<double>>(v, key, "an array of numbers");
      for (double a : c.alpha_levels) {
        if (!(a > 0.0 && a < 1.0)) bad_field(key, "levels must lie in (0, 1)");
      }
    } else if (key == "exact_p") {
      c.exact_p = get_as<bool>(v, key, "a boolean");
    } else if (key == "permutation_draws") {
      c.permutation_draws = get_as<std::size_t>(v, key, "a non-negative integer");
      if (c.permutation_draws == 0) bad_field(key, "must be > 0");
    } else if (key == "collapse_subset") {
      c.collapse_subset = get_as<std::vector<std::string>>(v, key, "an array of strings");
    } else if (key == "collapse") {
      c.collapse = get_as<bool>(v, key, "a boolean");
    } else if (key == "errors_per_fold") {
      c.errors_per_fold = get_as<std::size_t>(v, key, "a non-negative integer");
    } else if (key == "errors_cap") {
      c.errors_cap = get_as<std::size_t>(v, key, "a non-negative integer");
    } else if (key == "jobs") {
      c.jobs = get_as<int>(v, key, "an integer");
      if (c.jobs < 1) bad_field(key, "must be >= 1");
    } else {
      fail(ErrorCode::Validation, "unknown config field '" + key + "'");
    }
  }
  return c;
}

Json RunConfig::to_json() const {
  Json j;
  j["tagset_registry"] = tagset_registry ? Json(*tagset_registry) : Json(nullptr);
  j["tagset_id"] = tagset_id ? Json(*tagset_id) : Json(nullptr);
  j["format"] = format;
  j["role_map"] = Json::object();
  for (const auto& [k, v] : role_map) j["role_map"][k] = v;
  j["fold_count"] = fold_count;
  j["dedupe"] = dedupe;
  j["variant"] = variant;
  j["context_size"] = context_size;
  j["seed"] = seed;
  j["sample_fraction"] = sample_fraction;
  j["predictor"] = predictor;
  j["alpha"] = alpha;
  j["external"] = external;
  j["excluded_labels"] = excluded_labels;
  j["alpha_levels"] = alpha_levels;
  j["exact_p"] = exact_p;
  j["permutation_draws"] = permutation_draws;
  j["collapse_subset"] = collapse_subset;
  j["collapse"] = collapse;
  j["errors_per_fold"] = errors_per_fold;
  j["errors_cap"] = errors_cap;
  j["jobs"] = jobs;
  return j;
}

RunConfig resolve_config(const std::optional<std::string>& path, const Json& overrides) {
  Json merged = Json::object();
  if (path) {
    merged = read_json_file(*path);
    if (!merged.is_object()) fail(ErrorCode::Validation, *path + ": config must be a JSON object");
  }
  if (!overrides.is_null()) {
    if (!overrides.is_object()) fail(ErrorCode::Validation, "config overrides must be an object");
    for (const auto& [key, v] : overrides.items()) merged[key] = v;
  }
  return RunConfig::from_json(merged);
}

}  // namespace facetag
