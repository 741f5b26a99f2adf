#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "finevq/metrics/report.hpp"
#include "finevq/model/finevq_model.hpp"
#include "finevq/subjective/qa.hpp"
#include "finevq/subjective/ratings.hpp"

namespace finevq::harness {

struct PredictedAnswer {
  std::string video_id;
  subjective::QaTask task = subjective::QaTask::kYesNo;
  Dimension dimension = Dimension::kOverall;
  std::string answer;
};

struct Predictions {
  std::map<std::pair<std::string, Dimension>, double> scores;
  std::vector<PredictedAnswer> answers;
};

// Columns: video_id, dimension, score.
Predictions ReadPredictions(const std::filesystem::path& path);
void WritePredictions(const Predictions& p, std::ostream& out);

struct EvalOptions {
  std::string split_id = "test";
  std::uint64_t seed = 0;
  std::string model_id;
  bool fit_logistic = true;
};

// Scores every dimension that has predictions; each such dimension must
// cover all of test_ids. Accuracies are computed for yes/no, which-exist and
// which-most when answers are supplied.
metrics::EvalReport RunEval(const Predictions& pred, std::span<const std::string> test_ids,
                            const subjective::MosTable& mos,
                            std::span<const subjective::QaPair> gold_qa,
                            const EvalOptions& opt = {});

using PreparedClips = std::map<std::string, model::ClipInput>;

// Six dimension scores per clip plus greedy answers to the attribute
// questions in gold_qa (restricted to ids).
Predictions Predict(const model::FineVqModel& model, const PreparedClips& clips,
                    std::span<const std::string> ids,
                    std::span<const subjective::QaPair> gold_qa);

}  // namespace finevq::harness
