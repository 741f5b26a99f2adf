#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "finevq/dimension.hpp"
#include "json.hpp"

namespace finevq::metrics {

struct DimensionScores {
  double srcc = 0.0;
  double krcc = 0.0;
  double plcc = 0.0;
  bool plcc_fallback = false;
  std::size_t n = 0;
};

struct EvalReport {
  std::string split_id;
  std::uint64_t seed = 0;
  std::string model_id;
  std::array<std::optional<DimensionScores>, kNumDimensions> dimensions;
  // Keys: "yesno", "which_exist", "which_most" (and any others present).
  std::map<std::string, double> accuracy;
  std::map<std::string, std::string> notes;
};

// Deterministic JSON body: metadata, then one block per dimension in
// color .. overall order (Table-1 column order), then accuracies.
nlohmann::ordered_json ReportToJson(const EvalReport& r);
EvalReport ReportFromJson(const nlohmann::json& j);
void WriteReport(const EvalReport& r, const std::filesystem::path& path);

}  // namespace finevq::metrics
