#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace facetag {

// Face acts: hearer/speaker, positive/negative face, raised (+) or
// threatened (-), plus Other for utterances without a face act.
enum class FaceActLabel {
  HNegMinus,
  HNegPlus,
  HPosMinus,
  HPosPlus,
  SNegMinus,
  SNegPlus,
  SPosMinus,
  SPosPlus,
  Other,
};

inline constexpr std::size_t kFaceActCount = 9;

inline constexpr std::array<FaceActLabel, kFaceActCount> kAllFaceActs = {
    FaceActLabel::HNegMinus, FaceActLabel::HNegPlus,  FaceActLabel::HPosMinus,
    FaceActLabel::HPosPlus,  FaceActLabel::SNegMinus, FaceActLabel::SNegPlus,
    FaceActLabel::SPosMinus, FaceActLabel::SPosPlus,  FaceActLabel::Other,
};

std::string_view to_string(FaceActLabel label) noexcept;

// Exact match against the canonical lowercase form.
std::optional<FaceActLabel> parse_face_act(std::string_view text) noexcept;

// Like parse_face_act but throws Error(UnknownLabel).
FaceActLabel face_act_from_string(std::string_view text);

constexpr std::size_t index_of(FaceActLabel label) noexcept {
  return static_cast<std::size_t>(label);
}

// Canonical strings of all nine labels in enum order.
std::vector<std::string> face_act_labelset();

enum class SpeakerRole { Persuader, Persuadee };

std::string_view to_string(SpeakerRole role) noexcept;
std::optional<SpeakerRole> parse_speaker(std::string_view text) noexcept;

}  // namespace facetag
