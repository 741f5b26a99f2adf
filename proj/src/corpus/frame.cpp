#include "finevq/corpus/frame.hpp"

#include <cmath>

#include "finevq/error.hpp"
#include "finevq/kernels/kernels.hpp"

namespace finevq::corpus {

void ValidateClip(const FrameClip& clip) {
  if (clip.frames.empty()) throw ValidationError("clip has no frames");
  const auto h = clip.frames.front().height, w = clip.frames.front().width;
  for (std::size_t f = 0; f < clip.frames.size(); ++f) {
    const Frame& fr = clip.frames[f];
    if (fr.height != h || fr.width != w || fr.rgb.size() != h * w * 3) {
      throw ValidationError("frame " + std::to_string(f) + " has shape " +
                            std::to_string(fr.height) + "x" +
                            std::to_string(fr.width) + ", expected " +
                            std::to_string(h) + "x" + std::to_string(w));
    }
    for (double v : fr.rgb) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw ValidationError("frame " + std::to_string(f) +
                              " has a value outside [0, 1]");
      }
    }
  }
}

Frame ResizeFrame(const Frame& frame, std::size_t h, std::size_t w) {
  if (h == 0 || w == 0) throw ValidationError("resize target must be >= 1x1");
  if (frame.height == 0 || frame.width == 0) {
    throw ValidationError("cannot resize an empty frame");
  }
  if (frame.height == h && frame.width == w) return frame;
  Frame out(h, w);
  kernels::omp::ResizeBilinear(frame.rgb, frame.height, frame.width, 3,
                               out.rgb, h, w);
  return out;
}

std::vector<std::size_t> UniformSampleIndices(std::size_t frame_count,
                                              std::size_t n) {
  if (n == 0) throw ValidationError("sample count must be >= 1");
  if (frame_count == 0) throw ValidationError("video has no frames");
  std::vector<std::size_t> idx(n);
  const std::size_t last = frame_count - 1;
  if (n == 1) {
    idx[0] = (last + 1) / 2;  // round(last / 2), halves up
    return idx;
  }
  for (std::size_t k = 0; k < n; ++k) {
    // round(k * last / (n - 1)) in integer arithmetic, halves up.
    const std::size_t num = 2 * k * last + (n - 1);
    idx[k] = std::min(num / (2 * (n - 1)), last);
  }
  return idx;
}

}  // namespace finevq::corpus
