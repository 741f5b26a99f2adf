#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "finevq/harness/eval.hpp"
#include "finevq/harness/toy.hpp"
#include "finevq/model/train.hpp"

namespace finevq::harness {

// Supervision for the training split only. It is built from a MOS table
// already restricted to the train ids, so test scores never reach training.
struct TrainingSet {
  std::vector<std::string> ids;
  std::vector<const model::ClipInput*> clips;
  // Optional extra views per clip; a step draws one of clips[i] and views[i].
  std::vector<std::vector<const model::ClipInput*>> views;
  std::vector<std::vector<model::PromptItem>> items;
};

// Label-preserving copy of a clip: view v (0..7) applies horizontal flip
// (bit 0), vertical flip (bit 1) and transpose (bit 2) to every frame, then
// adds a per-channel offset, clamped to [0, 1]. View 0 with zero offsets is
// the identity. Transposed non-square frames swap height and width.
std::vector<corpus::Frame> ViewOfClip(const std::vector<corpus::Frame>& frames, int view,
                                      const std::array<double, 3>& offset);

inline constexpr double kViewColorOffset = 0.1;

// views - 1 extra views per id: geometric views 1.. cycling through the
// seven non-identity transforms, offsets uniform in +-kViewColorOffset.
using PreparedViews = std::map<std::string, std::vector<model::ClipInput>>;
PreparedViews PrepareViews(const model::FineVqModel& m,
                           const std::map<std::string, std::vector<corpus::Frame>>& frames,
                           std::span<const std::string> ids, int views, std::uint64_t seed);

// Attaches prepared extra views to the set's clips by id.
void AttachViews(TrainingSet& set, const PreparedViews& views);

// Copies the rows of `mos` / `labels` for `ids` only.
subjective::MosTable RestrictMos(const subjective::MosTable& mos,
                                 std::span<const std::string> ids);
subjective::AttributeLabelSet RestrictLabels(const subjective::AttributeLabelSet& labels,
                                             std::span<const std::string> ids);

// Eight QA items plus six dimension-score items per clip.
TrainingSet MakeTrainingSet(const model::Vocab& vocab, const PreparedClips& clips,
                            const subjective::MosTable& train_mos,
                            const subjective::AttributeLabelSet& train_labels);

struct TrainOptions {
  int steps = 1500;
  int clips_per_step = 4;
  int items_per_clip = 14;
  double lr = 2e-3;
  // Views per training clip (1 = original only); see PrepareViews.
  int views = 8;
  double lr_min = model::kMinLr;
  std::uint64_t seed = 11;
  // Called every log_every steps with (step, report).
  int log_every = 0;
  std::function<void(int, const model::LossReport&)> on_log;
};

struct TrainLog {
  std::vector<model::LossReport> losses;
  double seconds = 0.0;
};

TrainLog Train(model::FineVqModel& m, const TrainingSet& set, const TrainOptions& opt);

// Sparse sample of n_frames plus the full sequence for every clip.
PreparedClips PrepareToyClips(const model::FineVqModel& m, const ToyCorpus& corpus);

}  // namespace finevq::harness
