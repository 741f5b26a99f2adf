#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "finevq/corpus/frame.hpp"
#include "finevq/dimension.hpp"
#include "finevq/model/config.hpp"
#include "finevq/model/lora.hpp"
#include "finevq/model/tokenizer.hpp"
#include "finevq/nn/params.hpp"

namespace finevq::model {

// Frozen per-clip inputs: the patch stem of the sparse sample and the motion
// statistics of the full sequence. Computed once per clip.
struct ClipInput {
  Matrix stem;    // (n_frames * patches_per_frame) x d_img
  Matrix motion;  // 2 x d_mot
};

// Per-layer keys/values of the visual prefix, shared by every prompt on the
// same clip.
struct VisualPrefix {
  nn::Var tokens;  // visual_tokens x d_model
  std::vector<nn::Var> keys;
  std::vector<nn::Var> values;
  std::size_t length = 0;
};

struct TextOutput {
  nn::Var logits;  // text_length x vocab
  nn::Var score;   // 1 x 1, read at score_row
};

struct ForwardResult {
  Matrix logits;  // prompt_length x vocab
  double score = 0.0;
};

struct ForwardOptions {
  bool zero_visual = false;  // replace every visual token by zeros
  bool disable_lora = false;  // base model output
};

class FineVqModel {
 public:
  explicit FineVqModel(const ModelConfig& cfg, Vocab vocab = Vocab::FromTemplates());
  FineVqModel(FineVqModel&&) = default;

  const ModelConfig& config() const { return cfg_; }
  const Vocab& vocab() const { return vocab_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }
  const std::vector<Linear>& lora_layers() const { return lora_layers_; }

  ClipInput Prepare(const corpus::FrameClip& sampled,
                    const std::vector<corpus::Frame>& full) const;

  // T_s: (n_frames * tokens_per_frame) x d_model.
  nn::Var EncodeSpatial(nn::Tape& t, const Matrix& stem,
                        const ForwardOptions& opt = {}) const;
  // T_m: 2 x d_model.
  nn::Var EncodeMotion(nn::Tape& t, const Matrix& motion) const;

  VisualPrefix BuildPrefix(nn::Tape& t, const ClipInput& clip,
                           const ForwardOptions& opt = {}) const;
  // Text rows attend to the whole prefix and causally to earlier text.
  TextOutput ForwardText(nn::Tape& t, const VisualPrefix& prefix, const std::vector<int>& ids,
                         std::size_t score_row, const ForwardOptions& opt = {}) const;

  // Inference helpers (no gradients). prompt_ids start with <bos>.
  ForwardResult Forward(const ClipInput& clip, const std::vector<int>& prompt_ids,
                        const ForwardOptions& opt = {}) const;
  std::string Generate(const ClipInput& clip, std::string_view question,
                       std::size_t max_tokens = 8) const;
  double Score(const ClipInput& clip, Dimension d) const;

 private:
  struct Block {
    nn::Param* ln1_g;
    nn::Param* ln1_b;
    Linear q, k, v, o;
    nn::Param* ln2_g;
    nn::Param* ln2_b;
    Linear mlp1, mlp2;
  };
  struct Projector {
    Linear l1, l2;
  };

  Block MakeBlock(const std::string& name, int dim, bool lora, std::mt19937_64& rng);
  Projector MakeProjector(const std::string& name, int in, std::mt19937_64& rng);
  nn::Var ApplyProjector(nn::Tape& t, const Projector& p, nn::Var x) const;
  nn::Var ApplyLinear(nn::Tape& t, const Linear& l, nn::Var x, const ForwardOptions& opt) const;
  nn::Var Mlp(nn::Tape& t, const Block& b, nn::Var x, const ForwardOptions& opt) const;

  ModelConfig cfg_;
  Vocab vocab_;
  nn::ParamStore params_;
  Block enc_;
  nn::Param* enc_pos_;
  Projector proj_i_;
  Projector proj_m_;
  nn::Param* tok_emb_;
  nn::Param* pos_emb_;
  std::vector<Block> dec_;
  nn::Param* lnf_g_;
  nn::Param* lnf_b_;
  nn::Param* lm_head_;
  nn::Param* score_w_;
  nn::Param* score_b_;
  std::vector<Linear> lora_layers_;
};

// Inference on one clip: the visual prefix is built once and every query
// reuses it.
class ClipSession {
 public:
  ClipSession(const FineVqModel& model, const ClipInput& clip, ForwardOptions opt = {});
  ClipSession(const ClipSession&) = delete;
  ClipSession& operator=(const ClipSession&) = delete;

  ForwardResult Forward(const std::vector<int>& prompt_ids);
  std::string Generate(std::string_view question, std::size_t max_tokens = 8);
  double Score(Dimension d);

 private:
  const FineVqModel& model_;
  ForwardOptions opt_;
  nn::Tape tape_{false};
  VisualPrefix prefix_;
  std::size_t base_ = 0;
};

}  // namespace finevq::model
