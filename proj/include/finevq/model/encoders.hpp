#pragma once

#include <vector>

#include "finevq/corpus/frame.hpp"
#include "finevq/model/config.hpp"
#include "finevq/nn/matrix.hpp"

namespace finevq::model {

using nn::Matrix;

// Frozen patch stem standing in for a pretrained backbone's first stage.
// Each patch becomes [mean R, mean G, mean B, log1p(|DCT_uv(luma)| / s) ...]
// with the non-DC bases taken in order of increasing u + v. Output rows are patches
// of every frame in frame order, raster order inside a frame:
// (n_frames * patches_per_frame) x d_img. Frames must be frame_size square.
Matrix PatchStem(const corpus::FrameClip& clip, const ModelConfig& cfg);

inline constexpr double kStemMagnitudeScale = 0.005;

// Frozen slow-fast motion statistics, outside any graph. Row 0 is the slow
// pathway (every s_slow-th frame), row 1 the fast one (every s_fast-th).
// Each row is [app | diff | energy], motion_grid^2 values each:
//   app    mean over sampled frames of tanh(D (2 b_t - 1))
//   diff   D * gain * mean(b_{t+1} - b_t)
//   energy D * gain * mean over steps of per-block mean |Y_{t+1} - Y_t|
// where b_t are block-mean lumas and D the orthonormal 2-D DCT over the
// block grid. Frames are resized to frame_size first; motion_coverage
// keeps a uniform F / coverage subsample; short inputs are padded by
// repeating the last frame up to s_slow frames.
Matrix MotionFeatures(const std::vector<corpus::Frame>& frames, const ModelConfig& cfg);

inline constexpr double kMotionGain = 10.0;

// Orthonormal DCT-II basis over an n x n grid, one row per (u, v) basis in
// row-major (u, v) order; columns are grid cells in raster order.
Matrix Dct2Basis(int n);

}  // namespace finevq::model
