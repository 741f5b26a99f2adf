#include "finevq/harness/protocol.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <thread>

#include <omp.h>

#include "finevq/error.hpp"

namespace finevq::harness {

std::vector<std::string> LabelledCorpus::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : frames) out.push_back(id);
  return out;
}

std::vector<Dimension> LabelledCorpus::dimensions() const {
  std::vector<Dimension> out;
  for (Dimension d : kAllDimensions) {
    bool all = !frames.empty();
    for (const auto& [id, _] : frames) all = all && mos.Has(id, d);
    if (all) out.push_back(d);
  }
  return out;
}

LabelledCorpus FromToy(const ToyCorpus& toy) {
  LabelledCorpus c;
  for (const auto& clip : toy.clips) c.frames[clip.id] = clip.frames;
  c.mos = toy.mos;
  c.labels = toy.labels;
  return c;
}

LabelledCorpus LoadLabelledCorpus(std::span<const corpus::VideoManifestEntry> manifest,
                                  const subjective::MosTable& mos,
                                  const subjective::AttributeLabelSet& labels,
                                  std::size_t frame_size) {
  LabelledCorpus c;
  std::vector<std::string> kept;
  for (const auto& e : manifest) {
    bool any = false;
    for (Dimension d : kAllDimensions) any = any || mos.Has(e.video_id, d);
    if (!any) continue;
    c.frames[e.video_id] = corpus::LoadAllFrames(e, frame_size).frames;
    kept.push_back(e.video_id);
  }
  c.mos = RestrictMos(mos, kept);
  c.labels = RestrictLabels(labels, kept);
  return c;
}

PreparedClips PrepareClips(const model::FineVqModel& m, const LabelledCorpus& c,
                           std::span<const std::string> ids) {
  PreparedClips out;
  const auto& cfg = m.config();
  for (const auto& id : ids) {
    auto it = c.frames.find(id);
    if (it == c.frames.end()) throw ValidationError("no frames for video " + id);
    const auto& all = it->second;
    if (all.empty()) throw ValidationError("video " + id + " has no frames");
    corpus::FrameClip sampled;
    for (std::size_t i : corpus::UniformSampleIndices(all.size(), cfg.n_frames)) {
      sampled.frames.push_back(all[i]);
      sampled.indices.push_back(i);
    }
    sampled.source_id = id;
    out.emplace(id, m.Prepare(sampled, all));
  }
  return out;
}

TrainedModel TrainOn(const model::ModelConfig& cfg, const LabelledCorpus& c,
                     std::span<const std::string> train_ids, const TrainOptions& opt) {
  TrainedModel t;
  t.model = std::make_unique<model::FineVqModel>(cfg);
  const auto clips = PrepareClips(*t.model, c, train_ids);
  auto set = MakeTrainingSet(t.model->vocab(), clips, RestrictMos(c.mos, train_ids),
                             RestrictLabels(c.labels, train_ids));
  PreparedViews views;
  if (opt.views > 1) {
    views = PrepareViews(*t.model, c.frames, set.ids, opt.views, opt.seed ^ 0x5eedULL);
    AttachViews(set, views);
  }
  t.log = Train(*t.model, set, opt);
  return t;
}

metrics::EvalReport EvaluateOn(const model::FineVqModel& m, const LabelledCorpus& c,
                               std::span<const std::string> ids, const EvalOptions& opt,
                               std::optional<std::vector<Dimension>> dims) {
  const auto clips = PrepareClips(m, c, ids);
  const auto mos = RestrictMos(c.mos, ids);
  // Question synthesis needs every dimension; score-only corpora get no QA.
  std::vector<subjective::QaPair> qa;
  if (c.dimensions().size() == kNumDimensions) {
    qa = subjective::GenerateQa(mos, RestrictLabels(c.labels, ids));
  }
  auto pred = Predict(m, clips, ids, qa);
  if (dims) {
    const std::set<Dimension> keep(dims->begin(), dims->end());
    std::erase_if(pred.scores, [&](const auto& kv) { return !keep.count(kv.first.second); });
    std::erase_if(pred.answers, [&](const PredictedAnswer& a) {
      return a.dimension != Dimension::kOverall && !keep.count(a.dimension);
    });
  }
  return RunEval(pred, ids, mos, qa, opt);
}

CrossDatasetResult CrossDataset(const model::ModelConfig& cfg, const LabelledCorpus& a,
                                const LabelledCorpus& b, const TrainOptions& opt,
                                std::uint64_t split_seed) {
  CrossDatasetResult r;
  const auto da = a.dimensions(), db = b.dimensions();
  for (Dimension d : da) {
    if (std::find(db.begin(), db.end(), d) != db.end()) r.shared.push_back(d);
  }
  if (r.shared.empty()) throw ValidationError("corpora share no scored dimension");
  r.split = MakeSplit(a.ids(), split_seed, SplitMode::kTrainValTest);
  const auto trained = TrainOn(cfg, a, r.split.train, opt);
  EvalOptions eo;
  eo.split_id = "cross";
  eo.seed = split_seed;
  eo.model_id = "finevq";
  r.report = EvaluateOn(*trained.model, b, b.ids(), eo, r.shared);
  return r;
}

void ValidateAxes(const AblationAxes& axes) {
  for (int r : axes.rank) {
    if (r != 8 && r != 16) throw ValidationError("rank axis accepts 8 or 16");
  }
  for (int f : axes.frames) {
    if (f != 1 && f != 4 && f != 8) throw ValidationError("frames axis accepts 1, 4 or 8");
  }
  for (int c : axes.coverage) {
    if (c != 1 && c != 4 && c != 16) {
      throw ValidationError("coverage axis accepts 1 (F), 4 (F/4) or 16 (F/16)");
    }
  }
}

std::vector<AblationRow> AblationConfigs(const model::ModelConfig& base,
                                         const AblationAxes& axes) {
  ValidateAxes(axes);
  base.Validate();
  std::vector<AblationRow> rows;
  rows.push_back({"full", base, true, {}});
  auto add = [&](std::string name, model::ModelConfig c) {
    c.Validate();
    rows.push_back({std::move(name), c, false, {}});
  };
  for (bool v : axes.motion) {
    if (v == base.use_motion) continue;
    auto c = base;
    c.use_motion = v;
    add(v ? "with motion" : "w/o motion", c);
  }
  for (bool v : axes.lora_vision) {
    if (v == base.lora_vision) continue;
    auto c = base;
    c.lora_vision = v;
    add(v ? "with lora-vision" : "w/o lora-vision", c);
  }
  for (bool v : axes.lora_llm) {
    if (v == base.lora_llm) continue;
    auto c = base;
    c.lora_llm = v;
    add(v ? "with lora-llm" : "w/o lora-llm", c);
  }
  for (int v : axes.rank) {
    if (v == base.rank) continue;
    auto c = base;
    c.rank = v;
    add("rank " + std::to_string(v), c);
  }
  for (int v : axes.frames) {
    if (v == base.n_frames) continue;
    auto c = base;
    c.n_frames = v;
    add("frames " + std::to_string(v), c);
  }
  for (int v : axes.coverage) {
    if (v == base.motion_coverage) continue;
    auto c = base;
    c.motion_coverage = v;
    add("coverage F/" + std::to_string(v), c);
  }
  return rows;
}

std::vector<AblationRow> AblationSweep(const model::ModelConfig& base,
                                       const AblationAxes& axes, const LabelledCorpus& train,
                                       std::span<const std::string> train_ids,
                                       const LabelledCorpus& eval,
                                       std::span<const std::string> eval_ids,
                                       const TrainOptions& opt, bool parallel) {
  auto rows = AblationConfigs(base, axes);
  const int n = static_cast<int>(rows.size());
  std::vector<std::string> errors(rows.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int i = 0; i < n; ++i) {
    try {
      const auto trained = TrainOn(rows[i].config, train, train_ids, opt);
      EvalOptions eo;
      eo.split_id = "ablation";
      eo.seed = opt.seed;
      eo.model_id = rows[i].name;
      rows[i].report = EvaluateOn(*trained.model, eval, eval_ids, eo);
    } catch (const std::exception& e) {
      errors[i] = rows[i].name + ": " + e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw RuntimeError("ablation row failed: " + e);
  }
  return rows;
}

std::string AblationTable(std::span<const AblationRow> rows) {
  std::ostringstream out;
  out << "config\tmotion\tlora_vision\tlora_llm\trank\tframes\tcoverage";
  for (Dimension d : kAllDimensions) {
    out << '\t' << ToString(d) << "_srcc\t" << ToString(d) << "_plcc";
  }
  out << '\n';
  char buf[32];
  for (const auto& r : rows) {
    out << r.name << (r.reference ? " (reference)" : "") << '\t' << r.config.use_motion
        << '\t' << r.config.lora_vision << '\t' << r.config.lora_llm << '\t' << r.config.rank
        << '\t' << r.config.n_frames << "\tF/" << r.config.motion_coverage;
    for (Dimension d : kAllDimensions) {
      const auto& s = r.report.dimensions[Index(d)];
      if (!s) {
        out << "\t-\t-";
        continue;
      }
      std::snprintf(buf, sizeof buf, "\t%.4f", s->srcc);
      out << buf;
      std::snprintf(buf, sizeof buf, "\t%.4f", s->plcc);
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

double FramesPerSecond(std::size_t frames, double seconds) {
  if (!(seconds > 0.0)) throw ValidationError("bench duration must be positive");
  return static_cast<double>(frames) / seconds;
}

BenchResult BenchRuntime(const model::FineVqModel& m,
                         std::span<const std::vector<corpus::Frame>> videos,
                         std::function<double()> clock) {
  if (!clock) {
    clock = [] {
      return std::chrono::duration<double>(
                 std::chrono::steady_clock::now().time_since_epoch())
          .count();
    };
  }
  const auto& cfg = m.config();
  BenchResult r;
  double sink = 0.0;
  const double start = clock();
  for (const auto& v : videos) {
    if (v.empty()) throw ValidationError("bench video has no frames");
    corpus::FrameClip sampled;
    for (std::size_t i : corpus::UniformSampleIndices(v.size(), cfg.n_frames)) {
      sampled.frames.push_back(v[i]);
    }
    std::vector<corpus::Frame> full;
    full.reserve(v.size());
    for (const auto& f : v) full.push_back(corpus::ResizeFrame(f, cfg.frame_size, cfg.frame_size));
    const auto clip = m.Prepare(sampled, full);
    model::ClipSession session(m, clip);
    for (Dimension d : kAllDimensions) sink += session.Score(d);
    r.frames += v.size();
  }
  r.seconds = clock() - start;
  r.fps = FramesPerSecond(r.frames, r.seconds);
  r.note = EnvironmentNote();
  if (!std::isfinite(sink)) r.note += "; non-finite score";
  return r;
}

std::string EnvironmentNote() {
  std::ostringstream out;
  out << "cpu threads " << std::thread::hardware_concurrency() << ", omp max threads "
      << omp_get_max_threads() << ", double precision, no GPU";
  return out.str();
}

}  // namespace finevq::harness
