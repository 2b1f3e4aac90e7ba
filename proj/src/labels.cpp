#include "facetag/labels.hpp"

#include "facetag/error.hpp"

namespace facetag {

namespace {

constexpr std::array<std::string_view, kFaceActCount> kCanonical = {
    "hneg-", "hneg+", "hpos-", "hpos+", "sneg-",
    "sneg+", "spos-", "spos+", "other",
};

}  // namespace

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::Validation: return "Validation";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Protocol: return "Protocol";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::MissingResponse: return "MissingResponse";
    case ErrorCode::NonConvergence: return "NonConvergence";
  }
  return "Unknown";
}

std::string_view to_string(FaceActLabel label) noexcept {
  return kCanonical[index_of(label)];
}

std::optional<FaceActLabel> parse_face_act(std::string_view text) noexcept {
  for (std::size_t i = 0; i < kCanonical.size(); ++i) {
    if (kCanonical[i] == text) return kAllFaceActs[i];
  }
  return std::nullopt;
}

FaceActLabel face_act_from_string(std::string_view text) {
  if (auto label = parse_face_act(text)) return *label;
  fail(ErrorCode::UnknownLabel, "UnknownLabel(\"" + std::string(text) + "\")");
}

std::vector<std::string> face_act_labelset() {
  return {kCanonical.begin(), kCanonical.end()};
}

std::string_view to_string(SpeakerRole role) noexcept {
  return role == SpeakerRole::Persuader ? "ER" : "EE";
}

std::optional<SpeakerRole> parse_speaker(std::string_view text) noexcept {
  if (text == "ER") return SpeakerRole::Persuader;
  if (text == "EE") return SpeakerRole::Persuadee;
  return std::nullopt;
}

}  // namespace facetag
