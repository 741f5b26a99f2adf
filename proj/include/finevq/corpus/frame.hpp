#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace finevq::corpus {

// One RGB plane, interleaved, channel values in [0, 1].
struct Frame {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> rgb;

  Frame() = default;
  Frame(std::size_t h, std::size_t w, double fill = 0.0)
      : height(h), width(w), rgb(h * w * 3, fill) {}

  std::size_t pixels() const { return height * width; }
  double& at(std::size_t r, std::size_t c, std::size_t ch) {
    return rgb[(r * width + c) * 3 + ch];
  }
  double at(std::size_t r, std::size_t c, std::size_t ch) const {
    return rgb[(r * width + c) * 3 + ch];
  }

  bool operator==(const Frame&) const = default;
};

struct FrameClip {
  std::vector<Frame> frames;
  std::string source_id;
  // Nominal spacing between sampled indices (1 for dense clips).
  std::size_t stride = 1;
  std::vector<std::size_t> indices;

  std::size_t size() const { return frames.size(); }
};

// Throws ValidationError if the clip is empty, frames disagree in size, or
// any value is non-finite or outside [0, 1].
void ValidateClip(const FrameClip& clip);

// Bilinear resize to h x w; identity when the size already matches.
Frame ResizeFrame(const Frame& frame, std::size_t h, std::size_t w);

// Endpoint-inclusive uniform indices round(k (count-1) / (n-1)), k = 0..n-1,
// rounding halves up. n = 1 picks the middle frame.
std::vector<std::size_t> UniformSampleIndices(std::size_t frame_count,
                                              std::size_t n);

}  // namespace finevq::corpus
