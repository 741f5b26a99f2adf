#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "finevq/model/finevq_model.hpp"
#include "finevq/subjective/qa.hpp"

namespace finevq::model {

// One instruction item on a clip. At least one of answer / target is set.
struct PromptItem {
  std::vector<int> prompt;  // starts with <bos>
  std::vector<int> answer;  // ends with <eos>; empty for score-only items
  std::optional<double> target;
  subjective::QaTask task = subjective::QaTask::kYesNo;
};

PromptItem MakePromptItem(const Vocab& vocab, const subjective::QaPair& qa);

struct TrainSample {
  const ClipInput* clip = nullptr;
  std::vector<PromptItem> items;
};

struct LossReport {
  double l_language = 0.0;
  double l1 = 0.0;
  double total = 0.0;
  std::size_t answer_tokens = 0;
  std::size_t targets = 0;
};

// Builds the joint loss over a batch on `t`. The language term is the mean
// NLL over every answer token in the batch; the L1 term is the mean over
// items that carry a numeric target.
struct LossGraph {
  nn::Var total;
  LossReport report;
};
LossGraph BuildLoss(nn::Tape& t, const FineVqModel& model, std::span<const TrainSample> batch);

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

class AdamW {
 public:
  explicit AdamW(AdamWConfig cfg = {}) : cfg_(cfg) {}
  void Step(std::span<nn::Param* const> params, double lr);
  int steps() const { return steps_; }

 private:
  AdamWConfig cfg_;
  int steps_ = 0;
};

// Cosine decay from lr0 at step 0 to lr_min at step total.
double CosineLr(int step, int total, double lr0, double lr_min);

inline constexpr double kDefaultLr = 2e-4;
inline constexpr double kMinLr = 1e-6;

// Forward, backward, update. Throws RuntimeError with the offending
// quantity when the loss or a gradient is non-finite; no parameter moves
// in that case.
LossReport TrainStep(FineVqModel& model, std::span<const TrainSample> batch, AdamW& opt,
                     double lr);

}  // namespace finevq::model
