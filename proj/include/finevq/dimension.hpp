#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace finevq {

enum class Dimension { kColor = 0, kNoise, kArtifact, kBlur, kTemporal, kOverall };

inline constexpr std::size_t kNumDimensions = 6;

inline constexpr std::array<Dimension, kNumDimensions> kAllDimensions = {
    Dimension::kColor, Dimension::kNoise,    Dimension::kArtifact,
    Dimension::kBlur,  Dimension::kTemporal, Dimension::kOverall};

// The five dimensions that carry attribute labels and yes/no questions.
inline constexpr std::array<Dimension, 5> kDistortionDimensions = {
    Dimension::kColor, Dimension::kNoise, Dimension::kArtifact,
    Dimension::kBlur, Dimension::kTemporal};

std::string_view ToString(Dimension d);
std::optional<Dimension> ParseDimension(std::string_view s);
// Throws ValidationError on unknown names.
Dimension DimensionFromString(std::string_view s);

inline std::size_t Index(Dimension d) { return static_cast<std::size_t>(d); }

// Five Likert adjectives, worst first (raw score 1 .. 5).
const std::array<std::string_view, 5>& LevelWords(Dimension d);

// Three named distortion types offered per distortion dimension; empty for
// overall.
std::span<const std::string_view> AttributeOptions(Dimension d);

inline constexpr std::string_view kOptionOther = "other";
inline constexpr std::string_view kOptionNone = "none";

}  // namespace finevq
