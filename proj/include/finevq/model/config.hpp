#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace finevq::model {

// Full-size dimensions. Kept as constants; nothing here trains at this size.
inline constexpr int kPaperTokenDim = 4096;
inline constexpr int kPaperMotionDim = 2304;
inline constexpr int kPaperFrameSize = 448;
inline constexpr int kPaperFrames = 8;
inline constexpr int kPaperLoraRank = 16;

struct ModelConfig {
  int d_model = 64;
  int d_img = 64;
  int d_mot = 48;
  int frame_size = 32;
  int patch = 8;
  int n_frames = 8;
  int tokens_per_frame = 4;
  int enc_heads = 4;
  int dec_heads = 4;
  int dec_layers = 2;
  int ffn_mult = 2;
  int rank = 16;
  int s_slow = 8;
  int s_fast = 2;
  int motion_grid = 4;     // block grid side for motion statistics
  int motion_coverage = 1;  // the motion encoder sees F / coverage frames
  int max_context = 96;
  bool use_motion = true;
  bool lora_vision = true;
  bool lora_llm = true;
  double lm_head_std = 0.3;
  double score_offset = 50.0;
  double score_scale = 50.0;
  // The L1 term compares q / score_unit with MOS / score_unit.
  double score_unit = 100.0;
  std::uint64_t seed = 7;

  int patches_per_frame() const { return (frame_size / patch) * (frame_size / patch); }
  int spatial_tokens() const { return n_frames * tokens_per_frame; }
  int motion_tokens() const { return use_motion ? 2 : 0; }
  int visual_tokens() const { return spatial_tokens() + motion_tokens(); }

  // Throws ValidationError naming the first inconsistent field.
  void Validate() const;

  bool operator==(const ModelConfig&) const = default;
};

// Tiny model used by the gradient check.
ModelConfig GradCheckConfig();

// key=value lines, '#' comments. Unknown keys are rejected.
ModelConfig ParseConfigText(const std::string& text);
ModelConfig ReadConfigFile(const std::filesystem::path& path);
std::string ConfigToText(const ModelConfig& cfg);

}  // namespace finevq::model
