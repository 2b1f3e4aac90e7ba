#include "facetag/example_builder.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "facetag/error.hpp"
#include "facetag/keyed_order.hpp"

namespace facetag {

namespace {

std::string render_line(const Utterance& u, bool with_tag) {
  std::string line(to_string(u.speaker));
  line += ": ";
  line += u.text;
  if (with_tag) {
    line += " (";
    line += u.dialog_act->name;
    line += ')';
  }
  return line;
}

void require_dialog_act(const Utterance& u, ExampleVariant variant) {
  if (!u.dialog_act) {
    fail(ErrorCode::Validation,
         std::string(to_string(variant)) + " requires dialog_act annotations; missing on utterance " +
             example_id(u.conversation_id, u.turn));
  }
}

}  // namespace

std::string_view to_string(ExampleVariant variant) noexcept {
  switch (variant) {
    case ExampleVariant::Fos: return "fos";
    case ExampleVariant::Ta: return "ta";
    case ExampleVariant::MtlFa: return "mtl-fa";
    case ExampleVariant::MtlDa: return "mtl-da";
  }
  return "fos";
}

std::optional<ExampleVariant> parse_variant(std::string_view text) noexcept {
  std::string norm;
  for (char c : text) norm.push_back(c == '_' ? '-' : static_cast<char>(std::tolower(c)));
  for (auto v : {ExampleVariant::Fos, ExampleVariant::Ta, ExampleVariant::MtlFa,
                 ExampleVariant::MtlDa}) {
    if (norm == to_string(v)) return v;
  }
  return std::nullopt;
}

std::string_view task_of(ExampleVariant variant) noexcept {
  return variant == ExampleVariant::MtlDa ? kDialogActTask : kFaceActTask;
}

std::vector<Example> build_examples(const Corpus& corpus, ExampleVariant variant,
                                    int context_size) {
  if (context_size < 0) fail(ErrorCode::InvalidArgument, "context_size must be >= 0");
  const bool tagged = variant == ExampleVariant::Ta;
  const bool multitask = variant == ExampleVariant::MtlFa || variant == ExampleVariant::MtlDa;

  std::vector<Example> out;
  for (const auto& conv : corpus.conversations()) {
    const auto& utts = conv.utterances;
    for (std::size_t t = 0; t < utts.size(); ++t) {
      const auto& target = utts[t];
      Example ex;
      if (variant == ExampleVariant::MtlDa) {
        if (!target.dialog_act) continue;
        ex.target = target.dialog_act->name;
      } else {
        if (!target.face_act) continue;
        ex.target = std::string(to_string(*target.face_act));
      }

      const std::size_t first = t >= static_cast<std::size_t>(context_size)
                                    ? t - static_cast<std::size_t>(context_size)
                                    : 0;
      if (multitask) {
        ex.input += task_of(variant);
        ex.input += ":\n";
      }
      for (std::size_t i = first; i <= t; ++i) {
        if (tagged) require_dialog_act(utts[i], variant);
        ex.input += render_line(utts[i], tagged);
        if (i != t) ex.input += '\n';
      }
      ex.id = example_id(conv.id, target.turn);
      ex.variant = variant;
      ex.fold = conv.fold.value_or(kNoFold);
      out.push_back(std::move(ex));
    }
  }
  return out;
}

MixResult mix_multitask(const std::vector<Example>& face_act_examples, const Corpus& da_corpus,
                        const MixPlan& plan, int context_size) {
  if (!(plan.sample_fraction > 0.0 && plan.sample_fraction <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "sample_fraction must lie in (0, 1]");
  }
  for (const auto& e : face_act_examples) {
    if (e.variant != ExampleVariant::MtlFa) {
      fail(ErrorCode::InvalidArgument, "mix_multitask expects mtl-fa examples; got " +
                                           std::string(to_string(e.variant)) + " for " + e.id);
    }
  }

  std::vector<std::string> ids;
  {
    std::set<std::string> seen;
    for (const auto& c : da_corpus.conversations()) {
      if (seen.insert(c.id).second) ids.push_back(c.id);
    }
  }
  const auto take = static_cast<std::size_t>(
      std::floor(plan.sample_fraction * static_cast<double>(ids.size()) + 1e-9));
  if (take == 0) {
    fail(ErrorCode::Validation, "multi-task sample yields zero conversations (" +
                                    std::to_string(ids.size()) + " available)");
  }

  std::sort(ids.begin(), ids.end(), [&](const std::string& a, const std::string& b) {
    const auto ka = order_key(plan.seed, a);
    const auto kb = order_key(plan.seed, b);
    return ka != kb ? ka < kb : a < b;
  });
  ids.resize(take);
  const std::set<std::string> chosen(ids.begin(), ids.end());

  std::vector<Conversation> sampled;
  std::set<std::string> taken;
  for (const auto& c : da_corpus.conversations()) {
    if (chosen.count(c.id) && taken.insert(c.id).second) {
      Conversation copy = c;
      copy.fold.reset();
      sampled.push_back(std::move(copy));
    }
  }
  auto da_examples = build_examples(Corpus::build(std::move(sampled), da_corpus.tagset()),
                                    ExampleVariant::MtlDa, context_size);

  MixResult result;
  result.face_act_examples = face_act_examples.size();
  result.dialog_act_examples = da_examples.size();
  std::sort(ids.begin(), ids.end());
  result.sampled_conversations = std::move(ids);

  result.examples = face_act_examples;
  for (auto& e : da_examples) result.examples.push_back(std::move(e));

  const std::uint64_t shuffle_seed = splitmix64(plan.seed ^ 0x6d69782d6f726465ULL);
  std::vector<std::pair<std::uint64_t, std::size_t>> keyed;
  keyed.reserve(result.examples.size());
  for (std::size_t i = 0; i < result.examples.size(); ++i) {
    const auto& e = result.examples[i];
    keyed.emplace_back(
        order_key(shuffle_seed, std::string(to_string(e.variant)) + "|" + e.id), i);
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<Example> shuffled;
  shuffled.reserve(keyed.size());
  for (const auto& [key, i] : keyed) shuffled.push_back(std::move(result.examples[i]));
  result.examples = std::move(shuffled);
  return result;
}

Json MixResult::report() const {
  Json j;
  j["face_act_examples"] = face_act_examples;
  j["dialog_act_examples"] = dialog_act_examples;
  j["dialog_to_face_ratio"] =
      face_act_examples == 0 ? 0.0
                             : static_cast<double>(dialog_act_examples) /
                                   static_cast<double>(face_act_examples);
  j["sampled_conversations"] = sampled_conversations;
  return j;
}

Json example_to_json(const Example& e) {
  Json j;
  j["id"] = e.id;
  j["input"] = e.input;
  j["target"] = e.target;
  j["variant"] = std::string(to_string(e.variant));
  j["fold"] = e.fold;
  return j;
}

Example example_from_json(const Json& j) {
  Example e;
  try {
    e.id = j.at("id").get<std::string>();
    e.input = j.at("input").get<std::string>();
    e.target = j.at("target").get<std::string>();
    auto variant = parse_variant(j.at("variant").get<std::string>());
    if (!variant) fail(ErrorCode::Parse, "unknown variant in example " + e.id);
    e.variant = *variant;
    e.fold = j.contains("fold") && !j.at("fold").is_null() ? j.at("fold").get<int>() : kNoFold;
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::Parse, std::string("example: ") + ex.what());
  }
  if (e.input.empty()) fail(ErrorCode::Validation, "example " + e.id + " has empty input");
  if (e.variant != ExampleVariant::MtlDa && !parse_face_act(e.target)) {
    fail(ErrorCode::UnknownLabel, "example " + e.id + ": UnknownLabel(\"" + e.target + "\")");
  }
  return e;
}

std::vector<Example> load_examples(const std::string& path) {
  std::vector<Example> out;
  for (const auto& row : read_jsonl_file(path)) out.push_back(example_from_json(row));
  return out;
}

void save_examples(const std::string& path, const std::vector<Example>& examples) {
  std::vector<Json> rows;
  rows.reserve(examples.size());
  for (const auto& e : examples) rows.push_back(example_to_json(e));
  write_jsonl_file(path, rows);
}

}  // namespace facetag
