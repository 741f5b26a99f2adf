#include "finevq/harness/eval.hpp"

#include <set>

#include "finevq/error.hpp"
#include "finevq/metrics/accuracy.hpp"
#include "finevq/metrics/correlation.hpp"
#include "finevq/tsv.hpp"

namespace finevq::harness {

using subjective::QaTask;

Predictions ReadPredictions(const std::filesystem::path& path) {
  const TsvTable t = TsvTable::Read(path);
  const std::size_t cv = t.Column("video_id"), cd = t.Column("dimension"), cs = t.Column("score");
  Predictions p;
  for (std::size_t r = 0; r < t.size(); ++r) {
    const auto& row = t.row(r);
    const std::string ctx = path.string() + ":" + std::to_string(t.line(r));
    const auto key = std::make_pair(row[cv], DimensionFromString(row[cd]));
    if (p.scores.count(key)) {
      throw ValidationError(ctx + ": duplicate prediction for " + row[cv] + "/" + row[cd]);
    }
    p.scores[key] = ParseDouble(row[cs], ctx);
  }
  return p;
}

void WritePredictions(const Predictions& p, std::ostream& out) {
  out << "video_id\tdimension\tscore\n";
  for (const auto& [key, s] : p.scores) {
    out << key.first << '\t' << ToString(key.second) << '\t' << FormatDouble(s) << '\n';
  }
}

namespace {

bool IsAttributeTask(QaTask t) {
  return t == QaTask::kYesNo || t == QaTask::kWhichExist || t == QaTask::kWhichMost;
}

}  // namespace

metrics::EvalReport RunEval(const Predictions& pred, std::span<const std::string> test_ids,
                            const subjective::MosTable& mos,
                            std::span<const subjective::QaPair> gold_qa, const EvalOptions& opt) {
  if (test_ids.empty()) throw ValidationError("empty test split");
  metrics::EvalReport rep;
  rep.split_id = opt.split_id;
  rep.seed = opt.seed;
  rep.model_id = opt.model_id;
  bool any = false;
  for (Dimension d : kAllDimensions) {
    bool has = false;
    for (const auto& [key, s] : pred.scores) has = has || key.second == d;
    if (!has) continue;
    std::vector<double> x, y;
    for (const auto& id : test_ids) {
      auto it = pred.scores.find({id, d});
      if (it == pred.scores.end()) {
        throw ValidationError("missing " + std::string(ToString(d)) + " prediction for test video " +
                              id);
      }
      x.push_back(it->second);
      y.push_back(mos.Get(id, d).mos);
    }
    any = true;
    metrics::DimensionScores ds;
    ds.n = x.size();
    try {
      ds.srcc = metrics::Srcc(x, y);
      ds.krcc = metrics::Krcc(x, y);
      const auto pl = metrics::Plcc(x, y, opt.fit_logistic);
      ds.plcc = pl.value;
      ds.plcc_fallback = pl.fallback;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kValidation) throw;
      rep.notes[std::string(ToString(d))] = std::string("degenerate: ") + e.what();
    }
    rep.dimensions[Index(d)] = ds;
  }
  if (!any) throw ValidationError("predictions contain no scores");

  if (!pred.answers.empty()) {
    const std::set<std::string> test(test_ids.begin(), test_ids.end());
    std::map<std::tuple<std::string, QaTask, Dimension>, std::string> answered;
    for (const auto& a : pred.answers) answered[{a.video_id, a.task, a.dimension}] = a.answer;
    std::map<QaTask, std::vector<std::pair<std::string, std::string>>> pairs;
    for (const auto& g : gold_qa) {
      if (!IsAttributeTask(g.task) || !test.count(g.video_id)) continue;
      auto it = answered.find({g.video_id, g.task, g.dimension});
      if (it == answered.end()) {
        throw ValidationError("missing " + std::string(ToString(g.task)) + " answer for " +
                              g.video_id);
      }
      pairs[g.task].emplace_back(it->second, g.answer);
    }
    for (const auto& [task, ps] : pairs) {
      const auto type =
          task == QaTask::kYesNo ? metrics::QuestionType::kYesNo : metrics::QuestionType::kWhich;
      rep.accuracy[std::string(ToString(task))] = metrics::AttributeAccuracy(ps, type);
    }
  }
  return rep;
}

Predictions Predict(const model::FineVqModel& model, const PreparedClips& clips,
                    std::span<const std::string> ids, std::span<const subjective::QaPair> gold_qa) {
  Predictions p;
  std::map<std::string, std::vector<const subjective::QaPair*>> questions;
  for (const auto& g : gold_qa) {
    if (IsAttributeTask(g.task)) questions[g.video_id].push_back(&g);
  }
  for (const auto& id : ids) {
    auto it = clips.find(id);
    if (it == clips.end()) throw ValidationError("no prepared clip for " + id);
    model::ClipSession session(model, it->second);
    for (Dimension d : kAllDimensions) p.scores[{id, d}] = session.Score(d);
    for (const auto* g : questions[id]) {
      p.answers.push_back({id, g->task, g->dimension, session.Generate(g->question)});
    }
  }
  return p;
}

}  // namespace finevq::harness
