#include "finevq/model/finevq_model.hpp"

#include <algorithm>
#include <cmath>

#include "finevq/error.hpp"
#include "finevq/model/encoders.hpp"
#include "finevq/subjective/qa.hpp"

namespace finevq::model {

using nn::Tape;
using nn::Var;

FineVqModel::FineVqModel(const ModelConfig& cfg, Vocab vocab)
    : cfg_(cfg), vocab_(std::move(vocab)) {
  cfg_.Validate();
  std::mt19937_64 rng(cfg_.seed);
  const int dm = cfg_.d_model;

  enc_ = MakeBlock("enc", cfg_.d_img, cfg_.lora_vision, rng);
  enc_pos_ = &params_.Add("enc.pos", Matrix::Gaussian(cfg_.patches_per_frame(), cfg_.d_img, 0.02, rng),
                          false);
  proj_i_ = MakeProjector("proj_i", cfg_.d_img, rng);
  if (cfg_.use_motion) proj_m_ = MakeProjector("proj_m", cfg_.d_mot, rng);

  tok_emb_ = &params_.Add("dec.tok", Matrix::Gaussian(vocab_.size(), dm, 1.0, rng), false);
  pos_emb_ = &params_.Add("dec.pos", Matrix::Gaussian(cfg_.max_context, dm, 0.1, rng), false);
  for (int l = 0; l < cfg_.dec_layers; ++l) {
    dec_.push_back(MakeBlock("dec.l" + std::to_string(l), dm, cfg_.lora_llm, rng));
  }
  lnf_g_ = &params_.Add("dec.lnf.g", Matrix(1, dm, 1.0), false);
  lnf_b_ = &params_.Add("dec.lnf.b", Matrix(1, dm), false);
  lm_head_ = &params_.Add("dec.lm_head", Matrix::Gaussian(vocab_.size(), dm, cfg_.lm_head_std, rng),
                          false);
  score_w_ = &params_.Add("score.w", Matrix::Gaussian(1, dm, 0.01, rng), true);
  score_b_ = &params_.Add("score.b", Matrix(1, 1), true);
}

FineVqModel::Block FineVqModel::MakeBlock(const std::string& name, int dim, bool lora,
                                          std::mt19937_64& rng) {
  const std::size_t d = dim, r = lora ? cfg_.rank : 0;
  const double s = 1.0 / std::sqrt(static_cast<double>(d));
  const std::size_t hidden = d * cfg_.ffn_mult;
  Block b;
  b.ln1_g = &params_.Add(name + ".ln1.g", Matrix(1, d, 1.0), false);
  b.ln1_b = &params_.Add(name + ".ln1.b", Matrix(1, d), false);
  b.q = MakeLinear(params_, name + ".q", {d, d, s, false, false, r}, rng);
  b.k = MakeLinear(params_, name + ".k", {d, d, s, false, false, 0}, rng);
  b.v = MakeLinear(params_, name + ".v", {d, d, s, false, false, r}, rng);
  b.o = MakeLinear(params_, name + ".o", {d, d, 0.5 * s, false, false, 0}, rng);
  b.ln2_g = &params_.Add(name + ".ln2.g", Matrix(1, d, 1.0), false);
  b.ln2_b = &params_.Add(name + ".ln2.b", Matrix(1, d), false);
  b.mlp1 = MakeLinear(params_, name + ".mlp1", {d, hidden, s, true, false, 0}, rng);
  b.mlp2 = MakeLinear(params_, name + ".mlp2",
                      {hidden, d, 0.5 / std::sqrt(static_cast<double>(hidden)), true, false, 0},
                      rng);
  if (lora) {
    lora_layers_.push_back(b.q);
    lora_layers_.push_back(b.v);
  }
  return b;
}

FineVqModel::Projector FineVqModel::MakeProjector(const std::string& name, int in,
                                                  std::mt19937_64& rng) {
  const std::size_t dm = cfg_.d_model;
  Projector p;
  p.l1 = MakeLinear(params_, name + ".l1", {static_cast<std::size_t>(in), dm, 0.0, true, true, 0},
                    rng);
  p.l2 = MakeLinear(params_, name + ".l2", {dm, dm, 0.0, true, true, 0}, rng);
  return p;
}

Var FineVqModel::ApplyLinear(Tape& t, const Linear& l, Var x, const ForwardOptions& opt) const {
  if (opt.disable_lora && l.adapted()) {
    Linear base = l;
    base.lora_a = base.lora_b = nullptr;
    return Apply(t, base, x);
  }
  return Apply(t, l, x);
}

Var FineVqModel::ApplyProjector(Tape& t, const Projector& p, Var x) const {
  return Apply(t, p.l2, nn::Gelu(t, Apply(t, p.l1, x)));
}

Var FineVqModel::Mlp(Tape& t, const Block& b, Var x, const ForwardOptions& opt) const {
  Var h = nn::LayerNorm(t, x, t.Leaf(*b.ln2_g), t.Leaf(*b.ln2_b));
  h = ApplyLinear(t, b.mlp2, nn::Gelu(t, ApplyLinear(t, b.mlp1, h, opt)), opt);
  return nn::Add(t, x, h);
}

ClipInput FineVqModel::Prepare(const corpus::FrameClip& sampled,
                               const std::vector<corpus::Frame>& full) const {
  ClipInput c;
  corpus::FrameClip sized = sampled;
  for (auto& f : sized.frames) f = corpus::ResizeFrame(f, cfg_.frame_size, cfg_.frame_size);
  c.stem = PatchStem(sized, cfg_);
  c.motion = cfg_.use_motion ? MotionFeatures(full.empty() ? sampled.frames : full, cfg_)
                             : Matrix(2, cfg_.d_mot);
  return c;
}

Var FineVqModel::EncodeSpatial(Tape& t, const Matrix& stem, const ForwardOptions& opt) const {
  const std::size_t per = cfg_.patches_per_frame();
  nn::CheckShape(stem, cfg_.n_frames * per, cfg_.d_img, "spatial stem");
  Matrix x0 = stem;
  for (std::size_t r = 0; r < x0.rows(); ++r) {
    for (std::size_t c = 0; c < x0.cols(); ++c) x0(r, c) += enc_pos_->value(r % per, c);
  }
  Var x = t.Constant(std::move(x0));
  Var h = nn::LayerNorm(t, x, t.Leaf(*enc_.ln1_g), t.Leaf(*enc_.ln1_b));
  Var q = ApplyLinear(t, enc_.q, h, opt);
  Var k = ApplyLinear(t, enc_.k, h, opt);
  Var v = ApplyLinear(t, enc_.v, h, opt);
  // Attention never crosses frame boundaries.
  std::vector<Var> frames;
  for (int f = 0; f < cfg_.n_frames; ++f) {
    frames.push_back(nn::Attention(t, nn::SliceRows(t, q, f * per, per),
                                   nn::SliceRows(t, k, f * per, per),
                                   nn::SliceRows(t, v, f * per, per), cfg_.enc_heads, {}));
  }
  x = nn::Add(t, x, ApplyLinear(t, enc_.o, nn::ConcatRows(t, frames), opt));
  x = Mlp(t, enc_, x, opt);
  Var pooled = nn::GroupMeanRows(t, x, per / cfg_.tokens_per_frame);
  return ApplyProjector(t, proj_i_, pooled);
}

Var FineVqModel::EncodeMotion(Tape& t, const Matrix& motion) const {
  nn::CheckShape(motion, 2, cfg_.d_mot, "motion features");
  if (!cfg_.use_motion) throw ValidationError("motion pathway disabled in this config");
  return ApplyProjector(t, proj_m_, t.Constant(motion));
}

VisualPrefix FineVqModel::BuildPrefix(Tape& t, const ClipInput& clip,
                                      const ForwardOptions& opt) const {
  VisualPrefix p;
  std::vector<Var> parts{EncodeSpatial(t, clip.stem, opt)};
  if (cfg_.use_motion) parts.push_back(EncodeMotion(t, clip.motion));
  p.tokens = nn::ConcatRows(t, parts);
  p.length = t.value(p.tokens).rows();
  if (opt.zero_visual) p.tokens = nn::Scale(t, p.tokens, 0.0);

  Matrix pos(p.length, cfg_.d_model);
  std::copy_n(pos_emb_->value.data(), pos.size(), pos.data());
  Var x = nn::Add(t, p.tokens, t.Constant(std::move(pos)));
  for (std::size_t l = 0; l < dec_.size(); ++l) {
    const Block& b = dec_[l];
    Var h = nn::LayerNorm(t, x, t.Leaf(*b.ln1_g), t.Leaf(*b.ln1_b));
    Var q = ApplyLinear(t, b.q, h, opt);
    Var k = ApplyLinear(t, b.k, h, opt);
    Var v = ApplyLinear(t, b.v, h, opt);
    p.keys.push_back(k);
    p.values.push_back(v);
    if (l + 1 == dec_.size()) break;  // the last prefix update is never read
    x = nn::Add(t, x, ApplyLinear(t, b.o, nn::Attention(t, q, k, v, cfg_.dec_heads, {}), opt));
    x = Mlp(t, b, x, opt);
  }
  return p;
}

TextOutput FineVqModel::ForwardText(Tape& t, const VisualPrefix& prefix,
                                    const std::vector<int>& ids, std::size_t score_row,
                                    const ForwardOptions& opt) const {
  if (ids.empty()) throw ValidationError("empty prompt");
  if (prefix.length + ids.size() > static_cast<std::size_t>(cfg_.max_context)) {
    throw ValidationError("sequence of " + std::to_string(prefix.length + ids.size()) +
                          " tokens exceeds context length " + std::to_string(cfg_.max_context));
  }
  if (score_row >= ids.size()) throw ValidationError("score row outside the text");
  const std::size_t n = ids.size();
  Matrix pos(n, cfg_.d_model);
  std::copy_n(pos_emb_->value.data() + prefix.length * cfg_.d_model, pos.size(), pos.data());
  Var x = nn::Add(t, nn::GatherRows(t, t.Leaf(*tok_emb_), ids), t.Constant(std::move(pos)));
  nn::AttentionMask mask{true, prefix.length, prefix.length};
  for (std::size_t l = 0; l < dec_.size(); ++l) {
    const Block& b = dec_[l];
    Var h = nn::LayerNorm(t, x, t.Leaf(*b.ln1_g), t.Leaf(*b.ln1_b));
    Var q = ApplyLinear(t, b.q, h, opt);
    const Var ks[2] = {prefix.keys[l], ApplyLinear(t, b.k, h, opt)};
    const Var vs[2] = {prefix.values[l], ApplyLinear(t, b.v, h, opt)};
    Var att = nn::Attention(t, q, nn::ConcatRows(t, ks), nn::ConcatRows(t, vs), cfg_.dec_heads,
                            mask);
    x = nn::Add(t, x, ApplyLinear(t, b.o, att, opt));
    x = Mlp(t, b, x, opt);
  }
  Var hf = nn::LayerNorm(t, x, t.Leaf(*lnf_g_), t.Leaf(*lnf_b_));
  TextOutput out;
  out.logits = nn::MatMulNT(t, hf, t.Leaf(*lm_head_));
  Var row = nn::SliceRows(t, hf, score_row, 1);
  Var s = nn::Add(t, nn::MatMulNT(t, row, t.Leaf(*score_w_)), t.Leaf(*score_b_));
  out.score = nn::ScaleShift(t, s, cfg_.score_scale, cfg_.score_offset);
  return out;
}

ForwardResult FineVqModel::Forward(const ClipInput& clip, const std::vector<int>& prompt_ids,
                                   const ForwardOptions& opt) const {
  return ClipSession(*this, clip, opt).Forward(prompt_ids);
}

std::string FineVqModel::Generate(const ClipInput& clip, std::string_view question,
                                  std::size_t max_tokens) const {
  return ClipSession(*this, clip).Generate(question, max_tokens);
}

double FineVqModel::Score(const ClipInput& clip, Dimension d) const {
  return ClipSession(*this, clip).Score(d);
}

ClipSession::ClipSession(const FineVqModel& model, const ClipInput& clip, ForwardOptions opt)
    : model_(model), opt_(opt) {
  prefix_ = model_.BuildPrefix(tape_, clip, opt_);
  base_ = tape_.size();
}

ForwardResult ClipSession::Forward(const std::vector<int>& prompt_ids) {
  if (prompt_ids.empty()) throw ValidationError("empty prompt");
  const TextOutput o = model_.ForwardText(tape_, prefix_, prompt_ids, prompt_ids.size() - 1, opt_);
  ForwardResult r{tape_.value(o.logits), tape_.value(o.score)[0]};
  tape_.Truncate(base_);
  return r;
}

std::string ClipSession::Generate(std::string_view question, std::size_t max_tokens) {
  const auto& vocab = model_.vocab();
  std::vector<int> ids = vocab.EncodePrompt(question);
  const std::size_t start = ids.size();
  const auto limit = static_cast<std::size_t>(model_.config().max_context);
  for (std::size_t step = 0; step < max_tokens && prefix_.length + ids.size() < limit; ++step) {
    const ForwardResult r = Forward(ids);
    const auto last = r.logits.row(ids.size() - 1);
    const int next = static_cast<int>(std::max_element(last.begin(), last.end()) - last.begin());
    if (next == kEos) break;
    ids.push_back(next);
  }
  return vocab.Decode(std::vector<int>(ids.begin() + start, ids.end()));
}

double ClipSession::Score(Dimension d) {
  return Forward(model_.vocab().EncodePrompt(subjective::ScoreQuestion(d))).score;
}

}  // namespace finevq::model
