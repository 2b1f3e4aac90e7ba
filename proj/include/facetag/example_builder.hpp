#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "facetag/corpus.hpp"
#include "facetag/json.hpp"

namespace facetag {

enum class ExampleVariant { Fos, Ta, MtlFa, MtlDa };

std::string_view to_string(ExampleVariant variant) noexcept;
// Accepts "fos", "ta", "mtl-fa", "mtl-da" in any case, '_' for '-'.
std::optional<ExampleVariant> parse_variant(std::string_view text) noexcept;

inline constexpr std::string_view kFaceActTask = "face acts";
inline constexpr std::string_view kDialogActTask = "dialog acts";

std::string_view task_of(ExampleVariant variant) noexcept;

// Examples that never belong to a test fold (unassigned or auxiliary-task
// data) carry this fold value.
inline constexpr int kNoFold = -1;

struct Example {
  std::string id;
  std::string input;
  std::string target;
  ExampleVariant variant = ExampleVariant::Fos;
  int fold = kNoFold;

  bool operator==(const Example&) const = default;
};

// One example per labeled utterance (face act for FOS/TA/MTL-FA, dialog act
// for MTL-DA). The input holds up to context_size preceding turns of the same
// conversation and the target turn, rendered "<ROLE>: <text>" and joined by
// '\n'. TA appends " (<tag>)" to every line; MTL variants start with
// "<task>:\n".
std::vector<Example> build_examples(const Corpus& corpus, ExampleVariant variant,
                                    int context_size = 2);

struct MixPlan {
  double sample_fraction = 0.10;
  std::uint64_t seed = 0;
};

struct MixResult {
  std::vector<Example> examples;
  std::vector<std::string> sampled_conversations;
  std::size_t face_act_examples = 0;
  std::size_t dialog_act_examples = 0;

  Json report() const;
};

// Adds MTL-DA examples from floor(fraction * #conversations) whole
// conversations of da_corpus, then shuffles the union. Selection and order
// depend only on the seed and the ids involved.
MixResult mix_multitask(const std::vector<Example>& face_act_examples, const Corpus& da_corpus,
                        const MixPlan& plan, int context_size = 2);

Json example_to_json(const Example& e);
Example example_from_json(const Json& j);
std::vector<Example> load_examples(const std::string& path);
void save_examples(const std::string& path, const std::vector<Example>& examples);

}  // namespace facetag
