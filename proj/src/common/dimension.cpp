#include "finevq/dimension.hpp"

#include "finevq/error.hpp"

namespace finevq {

int ExitCode(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMissingInput:
      return 2;
    case ErrorKind::kValidation:
      return 3;
    case ErrorKind::kRuntime:
      break;
  }
  return 1;
}

namespace {

constexpr std::array<std::string_view, kNumDimensions> kNames = {
    "color", "noise", "artifact", "blur", "temporal", "overall"};

constexpr std::array<std::string_view, 5> kDistortionLevels = {
    "severe", "strong", "mild", "slight", "undistorted"};
constexpr std::array<std::string_view, 5> kQualityLevels = {
    "bad", "poor", "fair", "good", "excellent"};

constexpr std::array<std::string_view, 3> kColorOptions = {
    "color cast", "oversaturation", "underexposure"};
constexpr std::array<std::string_view, 3> kNoiseOptions = {
    "grain", "sensor noise", "mosquito noise"};
constexpr std::array<std::string_view, 3> kArtifactOptions = {
    "blocking", "ringing", "banding"};
constexpr std::array<std::string_view, 3> kBlurOptions = {
    "motion blur", "defocus", "upscaling blur"};
constexpr std::array<std::string_view, 3> kTemporalOptions = {
    "stutter", "jitter", "flicker"};

}  // namespace

std::string_view ToString(Dimension d) { return kNames[Index(d)]; }

std::optional<Dimension> ParseDimension(std::string_view s) {
  for (Dimension d : kAllDimensions) {
    if (kNames[Index(d)] == s) return d;
  }
  return std::nullopt;
}

Dimension DimensionFromString(std::string_view s) {
  if (auto d = ParseDimension(s)) return *d;
  throw ValidationError("unknown dimension '" + std::string(s) + "'");
}

const std::array<std::string_view, 5>& LevelWords(Dimension d) {
  switch (d) {
    case Dimension::kNoise:
    case Dimension::kArtifact:
    case Dimension::kBlur:
      return kDistortionLevels;
    default:
      return kQualityLevels;
  }
}

std::span<const std::string_view> AttributeOptions(Dimension d) {
  switch (d) {
    case Dimension::kColor:
      return kColorOptions;
    case Dimension::kNoise:
      return kNoiseOptions;
    case Dimension::kArtifact:
      return kArtifactOptions;
    case Dimension::kBlur:
      return kBlurOptions;
    case Dimension::kTemporal:
      return kTemporalOptions;
    case Dimension::kOverall:
      break;
  }
  return {};
}

}  // namespace finevq
