#include "finevq/harness/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>
#include <set>

#include "finevq/error.hpp"

namespace finevq::harness {

subjective::MosTable RestrictMos(const subjective::MosTable& mos,
                                 std::span<const std::string> ids) {
  subjective::MosTable out;
  for (const auto& id : ids) {
    for (Dimension d : kAllDimensions) {
      if (mos.Has(id, d)) out.Set(id, d, mos.Get(id, d));
    }
  }
  return out;
}

subjective::AttributeLabelSet RestrictLabels(const subjective::AttributeLabelSet& labels,
                                             std::span<const std::string> ids) {
  subjective::AttributeLabelSet out;
  for (const auto& id : ids) {
    for (Dimension d : kAllDimensions) out.Set(id, d, labels.Get(id, d));
  }
  return out;
}

TrainingSet MakeTrainingSet(const model::Vocab& vocab, const PreparedClips& clips,
                            const subjective::MosTable& train_mos,
                            const subjective::AttributeLabelSet& train_labels) {
  TrainingSet set;
  const auto qa = subjective::GenerateQa(train_mos, train_labels);
  for (const auto& id : train_mos.videos()) {
    auto it = clips.find(id);
    if (it == clips.end()) throw ValidationError("no prepared clip for training video " + id);
    set.ids.push_back(id);
    set.clips.push_back(&it->second);
    std::vector<model::PromptItem> items;
    for (const auto& p : qa) {
      if (p.video_id == id) items.push_back(model::MakePromptItem(vocab, p));
    }
    for (const auto& p : subjective::DimensionScorePairs(id, train_mos)) {
      items.push_back(model::MakePromptItem(vocab, p));
    }
    set.items.push_back(std::move(items));
  }
  if (set.ids.empty()) throw ValidationError("empty training set");
  return set;
}

std::vector<corpus::Frame> ViewOfClip(const std::vector<corpus::Frame>& frames, int view,
                                      const std::array<double, 3>& offset) {
  if (view < 0 || view > 7) throw ValidationError("view must be in 0..7");
  const bool hflip = view & 1, vflip = view & 2, transpose = view & 4;
  std::vector<corpus::Frame> out;
  out.reserve(frames.size());
  for (const auto& f : frames) {
    corpus::Frame g = transpose ? corpus::Frame(f.width, f.height) : corpus::Frame(f.height, f.width);
    for (std::size_t y = 0; y < g.height; ++y) {
      for (std::size_t x = 0; x < g.width; ++x) {
        std::size_t sy = transpose ? x : y, sx = transpose ? y : x;
        if (vflip) sy = f.height - 1 - sy;
        if (hflip) sx = f.width - 1 - sx;
        for (std::size_t c = 0; c < 3; ++c) {
          g.at(y, x, c) = std::clamp(f.at(sy, sx, c) + offset[c], 0.0, 1.0);
        }
      }
    }
    out.push_back(std::move(g));
  }
  return out;
}

PreparedViews PrepareViews(const model::FineVqModel& m,
                           const std::map<std::string, std::vector<corpus::Frame>>& frames,
                           std::span<const std::string> ids, int views, std::uint64_t seed) {
  if (views < 1) throw ValidationError("views must be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> offset(-kViewColorOffset, kViewColorOffset);
  PreparedViews out;
  for (const auto& id : ids) {
    auto it = frames.find(id);
    if (it == frames.end()) throw ValidationError("no frames for video " + id);
    auto& list = out[id];
    for (int v = 1; v < views; ++v) {
      const std::array<double, 3> o = {offset(rng), offset(rng), offset(rng)};
      const auto full = ViewOfClip(it->second, 1 + (v - 1) % 7, o);
      corpus::FrameClip sampled;
      for (std::size_t i : corpus::UniformSampleIndices(full.size(), m.config().n_frames)) {
        sampled.frames.push_back(full[i]);
        sampled.indices.push_back(i);
      }
      sampled.source_id = id;
      list.push_back(m.Prepare(sampled, full));
    }
  }
  return out;
}

void AttachViews(TrainingSet& set, const PreparedViews& views) {
  set.views.assign(set.ids.size(), {});
  for (std::size_t i = 0; i < set.ids.size(); ++i) {
    auto it = views.find(set.ids[i]);
    if (it == views.end()) continue;
    for (const auto& v : it->second) set.views[i].push_back(&v);
  }
}

TrainLog Train(model::FineVqModel& m, const TrainingSet& set, const TrainOptions& opt) {
  if (opt.steps < 0 || opt.clips_per_step <= 0 || opt.items_per_clip <= 0 || opt.views < 1) {
    throw ValidationError("invalid training options");
  }
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(opt.seed);
  model::AdamW adam;
  TrainLog log;
  std::vector<std::size_t> order(set.ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();
  for (int step = 0; step < opt.steps; ++step) {
    std::vector<model::TrainSample> batch;
    for (int c = 0; c < opt.clips_per_step && c < static_cast<int>(order.size()); ++c) {
      if (cursor >= order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      const std::size_t i = order[cursor++];
      model::TrainSample s;
      s.clip = set.clips[i];
      if (i < set.views.size() && !set.views[i].empty()) {
        const std::size_t v = rng() % (set.views[i].size() + 1);
        if (v > 0) s.clip = set.views[i][v - 1];
      }
      std::vector<std::size_t> pick(set.items[i].size());
      std::iota(pick.begin(), pick.end(), 0);
      std::shuffle(pick.begin(), pick.end(), rng);
      const std::size_t take = std::min<std::size_t>(opt.items_per_clip, pick.size());
      for (std::size_t j = 0; j < take; ++j) s.items.push_back(set.items[i][pick[j]]);
      batch.push_back(std::move(s));
    }
    const double lr = model::CosineLr(step, opt.steps, opt.lr, opt.lr_min);
    log.losses.push_back(model::TrainStep(m, batch, adam, lr));
    if (opt.on_log && opt.log_every > 0 && (step + 1) % opt.log_every == 0) {
      opt.on_log(step + 1, log.losses.back());
    }
  }
  log.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return log;
}

PreparedClips PrepareToyClips(const model::FineVqModel& m, const ToyCorpus& corpus) {
  PreparedClips out;
  const auto& cfg = m.config();
  for (const auto& c : corpus.clips) {
    corpus::FrameClip sampled;
    for (std::size_t i : corpus::UniformSampleIndices(c.frames.size(), cfg.n_frames)) {
      sampled.frames.push_back(c.frames[i]);
      sampled.indices.push_back(i);
    }
    sampled.source_id = c.id;
    out.emplace(c.id, m.Prepare(sampled, c.frames));
  }
  return out;
}

}  // namespace finevq::harness
