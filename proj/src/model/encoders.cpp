#include "finevq/model/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "finevq/error.hpp"
#include "finevq/kernels/kernels.hpp"

namespace finevq::model {

Matrix Dct2Basis(int n) {
  const int cells = n * n;
  Matrix d(cells, cells);
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      const double au = u == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
      const double av = v == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
      for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
          d(u * n + v, y * n + x) = au * av *
                                    std::cos(std::numbers::pi * (2 * y + 1) * u / (2.0 * n)) *
                                    std::cos(std::numbers::pi * (2 * x + 1) * v / (2.0 * n));
        }
      }
    }
  }
  return d;
}

namespace {

// Non-DC bases sorted by u + v, then u.
std::vector<int> StemBasisOrder(int p) {
  std::vector<int> order;
  for (int i = 1; i < p * p; ++i) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [p](int a, int b) {
    const int sa = a / p + a % p, sb = b / p + b % p;
    return sa < sb;
  });
  return order;
}

std::vector<double> LumaOf(const corpus::Frame& f) {
  std::vector<double> y(f.pixels());
  kernels::omp::Luma(f.rgb, y);
  return y;
}

}  // namespace

Matrix PatchStem(const corpus::FrameClip& clip, const ModelConfig& cfg) {
  if (static_cast<int>(clip.size()) != cfg.n_frames) {
    throw ValidationError("spatial encoder expects " + std::to_string(cfg.n_frames) +
                          " frames, got " + std::to_string(clip.size()));
  }
  const std::size_t fs = cfg.frame_size, p = cfg.patch, side = fs / p;
  const std::size_t per_frame = side * side;
  const Matrix basis = Dct2Basis(cfg.patch);
  const std::vector<int> order = StemBasisOrder(cfg.patch);
  Matrix out(cfg.n_frames * per_frame, cfg.d_img);
  for (std::size_t f = 0; f < clip.size(); ++f) {
    const corpus::Frame& fr = clip.frames[f];
    if (fr.height != fs || fr.width != fs) {
      throw ValidationError("spatial encoder expects " + std::to_string(fs) + "x" +
                            std::to_string(fs) + " frames, got " + std::to_string(fr.height) +
                            "x" + std::to_string(fr.width));
    }
    const std::vector<double> y = LumaOf(fr);
    std::vector<double> block(p * p);
    for (std::size_t py = 0; py < side; ++py) {
      for (std::size_t px = 0; px < side; ++px) {
        auto row = out.row(f * per_frame + py * side + px);
        for (std::size_t yy = 0; yy < p; ++yy) {
          for (std::size_t xx = 0; xx < p; ++xx) {
            const std::size_t r = py * p + yy, c = px * p + xx;
            for (int ch = 0; ch < 3; ++ch) row[ch] += fr.at(r, c, ch);
            block[yy * p + xx] = y[r * fs + c];
          }
        }
        for (int ch = 0; ch < 3; ++ch) row[ch] /= static_cast<double>(p * p);
        for (int k = 3; k < cfg.d_img; ++k) {
          const auto b = basis.row(order[k - 3]);
          double s = 0.0;
          for (std::size_t i = 0; i < block.size(); ++i) s += b[i] * block[i];
          row[k] = std::log1p(std::abs(s) / kStemMagnitudeScale);
        }
      }
    }
  }
  return out;
}

Matrix MotionFeatures(const std::vector<corpus::Frame>& frames, const ModelConfig& cfg) {
  if (frames.empty()) throw ValidationError("motion encoder needs at least one frame");
  std::vector<std::size_t> keep(frames.size());
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
  if (cfg.motion_coverage > 1) {
    const std::size_t n = std::max<std::size_t>(1, frames.size() / cfg.motion_coverage);
    keep = corpus::UniformSampleIndices(frames.size(), n);
  }
  while (keep.size() < static_cast<std::size_t>(cfg.s_slow)) keep.push_back(keep.back());

  const std::size_t fs = cfg.frame_size, g = cfg.motion_grid, bs = fs / g, cells = g * g;
  // Luma planes and block means of every kept frame.
  std::vector<std::vector<double>> luma(keep.size());
  std::vector<std::vector<double>> means(keep.size(), std::vector<double>(cells));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (i > 0 && keep[i] == keep[i - 1]) {
      luma[i] = luma[i - 1];
      means[i] = means[i - 1];
      continue;
    }
    luma[i] = LumaOf(corpus::ResizeFrame(frames[keep[i]], fs, fs));
    for (std::size_t r = 0; r < fs; ++r) {
      for (std::size_t c = 0; c < fs; ++c) means[i][(r / bs) * g + c / bs] += luma[i][r * fs + c];
    }
    for (double& m : means[i]) m /= static_cast<double>(bs * bs);
  }

  const Matrix dct = Dct2Basis(static_cast<int>(g));
  auto project = [&](const std::vector<double>& v, double gain, std::span<double> out) {
    for (std::size_t u = 0; u < cells; ++u) {
      double s = 0.0;
      for (std::size_t j = 0; j < cells; ++j) s += dct(u, j) * v[j];
      out[u] = gain * s;
    }
  };

  Matrix out(2, cfg.d_mot);
  const int strides[2] = {cfg.s_slow, cfg.s_fast};
  for (int path = 0; path < 2; ++path) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < keep.size(); i += strides[path]) idx.push_back(i);
    auto row = out.row(path);

    std::vector<double> app(cells, 0.0), tmp(cells), centred(cells);
    for (std::size_t i : idx) {
      for (std::size_t j = 0; j < cells; ++j) centred[j] = 2.0 * means[i][j] - 1.0;
      project(centred, 1.0, tmp);
      for (std::size_t j = 0; j < cells; ++j) app[j] += std::tanh(tmp[j]);
    }
    for (std::size_t j = 0; j < cells; ++j) row[j] = app[j] / static_cast<double>(idx.size());

    std::vector<double> diff(cells, 0.0), energy(cells, 0.0);
    const std::size_t steps = idx.size() - 1;
    for (std::size_t s = 0; s < steps; ++s) {
      const std::size_t a = idx[s], b = idx[s + 1];
      for (std::size_t j = 0; j < cells; ++j) diff[j] += means[b][j] - means[a][j];
      for (std::size_t r = 0; r < fs; ++r) {
        for (std::size_t c = 0; c < fs; ++c) {
          energy[(r / bs) * g + c / bs] += std::abs(luma[b][r * fs + c] - luma[a][r * fs + c]);
        }
      }
    }
    if (steps > 0) {
      for (std::size_t j = 0; j < cells; ++j) {
        diff[j] /= static_cast<double>(steps);
        energy[j] /= static_cast<double>(steps * bs * bs);
      }
    }
    project(diff, kMotionGain, row.subspan(cells, cells));
    project(energy, kMotionGain, row.subspan(2 * cells, cells));
  }
  return out;
}

}  // namespace finevq::model
