#include "finevq/model/train.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "finevq/error.hpp"

namespace finevq::model {

using nn::Tape;
using nn::Var;

PromptItem MakePromptItem(const Vocab& vocab, const subjective::QaPair& qa) {
  PromptItem it;
  it.prompt = vocab.EncodePrompt(qa.question);
  if (!qa.answer.empty()) it.answer = vocab.EncodeAnswer(qa.answer);
  it.target = qa.numeric_target;
  it.task = qa.task;
  if (it.answer.empty() && !it.target) {
    throw ValidationError("QA item for '" + qa.video_id + "' has neither answer nor target");
  }
  return it;
}

LossGraph BuildLoss(Tape& t, const FineVqModel& model, std::span<const TrainSample> batch) {
  std::size_t total_tokens = 0;
  for (const auto& s : batch) {
    for (const auto& it : s.items) total_tokens += it.answer.size();
  }
  std::vector<Var> lang_terms, scores;
  std::vector<double> targets;
  std::vector<char> mask;
  for (const auto& s : batch) {
    if (!s.clip) throw ValidationError("training sample without clip");
    const VisualPrefix prefix = model.BuildPrefix(t, *s.clip);
    for (const auto& it : s.items) {
      if (it.prompt.empty()) throw ValidationError("empty prompt");
      std::vector<int> ids = it.prompt;
      std::vector<int> labels(it.prompt.size(), -1);
      if (!it.answer.empty()) {
        ids.insert(ids.end(), it.answer.begin(), it.answer.end() - 1);
        labels.resize(ids.size(), -1);
        for (std::size_t j = 0; j < it.answer.size(); ++j) {
          labels[it.prompt.size() - 1 + j] = it.answer[j];
        }
      }
      const TextOutput out = model.ForwardText(t, prefix, ids, it.prompt.size() - 1);
      if (!it.answer.empty()) {
        const double w = static_cast<double>(it.answer.size()) / static_cast<double>(total_tokens);
        Var l = nn::LanguageLoss(t, out.logits, labels);
        lang_terms.push_back(nn::Scale(t, l, w));
      }
      const double unit = model.config().score_unit;
      scores.push_back(nn::Scale(t, out.score, 1.0 / unit));
      targets.push_back(it.target.value_or(0.0) / unit);
      mask.push_back(it.target ? 1 : 0);
    }
  }
  LossGraph g;
  std::vector<Var> parts;
  if (!lang_terms.empty()) parts.push_back(nn::Sum(t, lang_terms));
  std::size_t n_targets = 0;
  for (char m : mask) n_targets += m;
  double l1_value = 0.0;
  if (n_targets > 0) {
    Var l1 = nn::MaskedL1(t, nn::ConcatRows(t, scores), targets, mask);
    l1_value = t.value(l1)[0];
    parts.push_back(l1);
  }
  if (parts.empty()) throw ValidationError("batch has no answer tokens and no targets");
  g.total = nn::Sum(t, parts);
  g.report.l_language = lang_terms.empty() ? 0.0 : t.value(parts.front())[0];
  g.report.l1 = l1_value;
  g.report.total = g.report.l_language + g.report.l1;
  g.report.answer_tokens = total_tokens;
  g.report.targets = n_targets;
  return g;
}

void AdamW::Step(std::span<nn::Param* const> params, double lr) {
  ++steps_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, steps_);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, steps_);
  for (nn::Param* p : params) {
    if (!p->trainable) continue;
    if (!p->m.SameShape(p->value)) p->m = Matrix(p->value.rows(), p->value.cols());
    if (!p->v.SameShape(p->value)) p->v = Matrix(p->value.rows(), p->value.cols());
    if (!p->grad.SameShape(p->value)) continue;  // never reached by the loss
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double g = p->grad[i];
      p->m[i] = cfg_.beta1 * p->m[i] + (1.0 - cfg_.beta1) * g;
      p->v[i] = cfg_.beta2 * p->v[i] + (1.0 - cfg_.beta2) * g * g;
      const double mh = p->m[i] / bc1, vh = p->v[i] / bc2;
      p->value[i] -= lr * (mh / (std::sqrt(vh) + cfg_.eps) + cfg_.weight_decay * p->value[i]);
    }
  }
}

double CosineLr(int step, int total, double lr0, double lr_min) {
  if (total <= 0) return lr0;
  const double f = std::clamp(static_cast<double>(step) / total, 0.0, 1.0);
  return lr_min + 0.5 * (lr0 - lr_min) * (1.0 + std::cos(std::numbers::pi * f));
}

LossReport TrainStep(FineVqModel& model, std::span<const TrainSample> batch, AdamW& opt,
                     double lr) {
  model.params().ZeroGrad();
  Tape t;
  LossGraph g = BuildLoss(t, model, batch);
  if (!std::isfinite(g.report.total)) {
    throw RuntimeError("non-finite loss (language " + std::to_string(g.report.l_language) +
                       ", l1 " + std::to_string(g.report.l1) + ")");
  }
  t.Backward(g.total);
  auto trainable = model.params().Trainable();
  for (const nn::Param* p : trainable) {
    if (!p->grad.AllFinite()) throw RuntimeError("non-finite gradient in " + p->name);
  }
  opt.Step(trainable, lr);
  return g.report;
}

}  // namespace finevq::model
