#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "finevq/dimension.hpp"
#include "finevq/subjective/attributes.hpp"
#include "finevq/subjective/ratings.hpp"

namespace finevq::subjective {

enum class QaTask { kYesNo, kWhichExist, kWhichMost, kOverallQuality, kScore };

std::string_view ToString(QaTask t);
QaTask QaTaskFromString(std::string_view s);

struct QaPair {
  std::string video_id;
  QaTask task = QaTask::kYesNo;
  Dimension dimension = Dimension::kOverall;  // yes/no and score tasks
  std::string question;
  std::string answer;
  std::optional<double> numeric_target;

  bool operator==(const QaPair&) const = default;
};

// Upper bounds of the lower four MOS bins: [0,20) [20,40) [40,60) [60,80)
// [80,100].
using LevelThresholds = std::array<double, 4>;
inline constexpr LevelThresholds kDefaultThresholds = {20.0, 40.0, 60.0, 80.0};

// Throws ValidationError outside [0, 100].
std::string_view LevelFromMos(double mos, Dimension d = Dimension::kOverall,
                              const LevelThresholds& th = kDefaultThresholds);

std::string YesNoQuestion(Dimension d);
std::string WhichExistQuestion();
std::string WhichMostQuestion();
std::string ScoreQuestion(Dimension d);

// Eight pairs per video in a fixed order: five yes/no (color .. temporal),
// which-exist, which-most, overall quality. Videos come from the MOS table;
// missing label cells count as no distortion.
std::vector<QaPair> GenerateQa(const MosTable& mos,
                               const AttributeLabelSet& labels,
                               const LevelThresholds& th = kDefaultThresholds);

// Score prompts for every dimension (answer = level word, target = MOS).
std::vector<QaPair> DimensionScorePairs(const std::string& video_id,
                                        const MosTable& mos,
                                        const LevelThresholds& th = kDefaultThresholds);

std::string SerializeQa(const QaPair& qa);
QaPair ParseQa(const std::string& line);
void WriteQa(std::span<const QaPair> pairs, const std::filesystem::path& path);
std::vector<QaPair> ReadQa(const std::filesystem::path& path);

}  // namespace finevq::subjective
