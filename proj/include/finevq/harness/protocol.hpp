#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "finevq/corpus/manifest.hpp"
#include "finevq/harness/split.hpp"
#include "finevq/harness/trainer.hpp"
#include "finevq/model/config.hpp"

namespace finevq::harness {

// A corpus held in memory: every frame of every clip plus its MOS table and
// attribute labels. Clips are re-sampled per model config.
struct LabelledCorpus {
  std::map<std::string, std::vector<corpus::Frame>> frames;
  subjective::MosTable mos;
  subjective::AttributeLabelSet labels;

  std::vector<std::string> ids() const;
  // Dimensions with a MOS cell for every clip.
  std::vector<Dimension> dimensions() const;
};

LabelledCorpus FromToy(const ToyCorpus& toy);
// Loads each manifest entry resized to frame_size; entries without MOS rows
// are dropped.
LabelledCorpus LoadLabelledCorpus(std::span<const corpus::VideoManifestEntry> manifest,
                                  const subjective::MosTable& mos,
                                  const subjective::AttributeLabelSet& labels,
                                  std::size_t frame_size);

PreparedClips PrepareClips(const model::FineVqModel& m, const LabelledCorpus& c,
                           std::span<const std::string> ids);

struct TrainedModel {
  std::unique_ptr<model::FineVqModel> model;
  TrainLog log;
};

// Builds supervision from the rows of `train_ids` only.
TrainedModel TrainOn(const model::ModelConfig& cfg, const LabelledCorpus& c,
                     std::span<const std::string> train_ids, const TrainOptions& opt);

// Predicts and scores `ids`; dimensions outside `dims` (when given) are left
// out of the report.
metrics::EvalReport EvaluateOn(const model::FineVqModel& m, const LabelledCorpus& c,
                               std::span<const std::string> ids, const EvalOptions& opt,
                               std::optional<std::vector<Dimension>> dims = std::nullopt);

struct CrossDatasetResult {
  metrics::EvalReport report;
  std::vector<Dimension> shared;
  SplitPlan split;
};

// Trains on the train split of `a` (seed `split_seed`) and evaluates on all of
// `b` over the dimensions both corpora define. Throws ValidationError when
// no dimension is shared.
CrossDatasetResult CrossDataset(const model::ModelConfig& cfg, const LabelledCorpus& a,
                                const LabelledCorpus& b, const TrainOptions& opt,
                                std::uint64_t split_seed);

struct AblationAxes {
  std::vector<bool> motion = {true, false};
  std::vector<bool> lora_vision = {true, false};
  std::vector<bool> lora_llm = {true, false};
  std::vector<int> rank = {8, 16};
  std::vector<int> frames = {1, 4, 8};
  // Motion coverage as a divisor of the frame count: 16 -> F/16, 1 -> F.
  std::vector<int> coverage = {16, 4, 1};
};

struct AblationRow {
  std::string name;
  model::ModelConfig config;
  bool reference = false;
  metrics::EvalReport report;
};

// Throws ValidationError on values outside the supported axis ranges.
void ValidateAxes(const AblationAxes& axes);

// One-factor-at-a-time rows around `base` (the reference row first), each
// value on each axis differing from the base in exactly that field.
std::vector<AblationRow> AblationConfigs(const model::ModelConfig& base,
                                         const AblationAxes& axes);

// Trains and evaluates every row with the same split, seeds and options.
// Rows are independent; `parallel` runs them on OpenMP threads.
std::vector<AblationRow> AblationSweep(const model::ModelConfig& base,
                                       const AblationAxes& axes, const LabelledCorpus& train,
                                       std::span<const std::string> train_ids,
                                       const LabelledCorpus& eval,
                                       std::span<const std::string> eval_ids,
                                       const TrainOptions& opt, bool parallel = false);

// Table-shaped text: one row per configuration, SRCC/PLCC per dimension.
std::string AblationTable(std::span<const AblationRow> rows);

struct BenchResult {
  double seconds = 0.0;
  std::size_t frames = 0;
  double fps = 0.0;
  std::string note;
};

double FramesPerSecond(std::size_t frames, double seconds);

// Times prepare + six dimension scores for every clip. `clock` returns
// seconds and is injectable for tests.
BenchResult BenchRuntime(const model::FineVqModel& m,
                         std::span<const std::vector<corpus::Frame>> videos,
                         std::function<double()> clock = {});

std::string EnvironmentNote();

}  // namespace finevq::harness
