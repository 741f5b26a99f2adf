#include "finevq/features/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "finevq/error.hpp"
#include "finevq/kernels/kernels.hpp"

namespace finevq::features {

namespace {

struct Stat {
  double mean = 0.0;
  double std = 0.0;
};

Stat MeanStd(std::span<const double> v) {
  Stat s;
  if (v.empty()) return s;
  double sum = 0.0;
#pragma omp parallel for reduction(+ : sum) schedule(static)
  for (std::size_t i = 0; i < v.size(); ++i) sum += v[i];
  s.mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
#pragma omp parallel for reduction(+ : ss) schedule(static)
  for (std::size_t i = 0; i < v.size(); ++i) ss += (v[i] - s.mean) * (v[i] - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(v.size()));
  return s;
}

std::vector<double> Luma255(const corpus::Frame& f) {
  std::vector<double> y(f.pixels());
  kernels::omp::Luma(f.rgb, y);
  for (double& v : y) v *= 255.0;
  return y;
}

MeanMax Summarize(const std::vector<double>& v) {
  MeanMax m;
  if (v.empty()) return m;
  double sum = 0.0;
  for (double x : v) sum += x;
  m.mean = sum / static_cast<double>(v.size());
  m.max = *std::max_element(v.begin(), v.end());
  return m;
}

}  // namespace

double Colorfulness(const corpus::Frame& frame) {
  const std::size_t n = frame.pixels();
  std::vector<double> rg(n), yb(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = frame.rgb[3 * i] * 255.0, g = frame.rgb[3 * i + 1] * 255.0,
                 b = frame.rgb[3 * i + 2] * 255.0;
    rg[i] = r - g;
    yb[i] = 0.5 * (r + g) - b;
  }
  const Stat a = MeanStd(rg), c = MeanStd(yb);
  return std::sqrt(a.std * a.std + c.std * c.std) +
         0.3 * std::sqrt(a.mean * a.mean + c.mean * c.mean);
}

double Brightness(const corpus::Frame& frame) {
  return MeanStd(Luma255(frame)).mean;
}

double Contrast(const corpus::Frame& frame) { return MeanStd(Luma255(frame)).std; }

MeanMax SpatialInformation(const corpus::FrameClip& clip) {
  if (clip.frames.empty()) throw ValidationError("SI of an empty clip");
  std::vector<double> per_frame;
  for (const auto& f : clip.frames) {
    if (f.height < 3 || f.width < 3) {
      per_frame.push_back(0.0);
      continue;
    }
    const auto y = Luma255(f);
    std::vector<double> mag((f.height - 2) * (f.width - 2));
    kernels::omp::SobelMagnitude(y, f.height, f.width, mag);
    per_frame.push_back(MeanStd(mag).std);
  }
  return Summarize(per_frame);
}

MeanMax TemporalInformation(const corpus::FrameClip& clip) {
  if (clip.frames.size() < 2) return {};
  std::vector<double> per_step;
  auto prev = Luma255(clip.frames[0]);
  for (std::size_t k = 1; k < clip.frames.size(); ++k) {
    auto cur = Luma255(clip.frames[k]);
    if (cur.size() != prev.size()) throw ValidationError("TI over frames of unequal size");
    std::vector<double> diff(cur.size());
    for (std::size_t i = 0; i < cur.size(); ++i) diff[i] = cur[i] - prev[i];
    per_step.push_back(MeanStd(diff).std);
    prev = std::move(cur);
  }
  return Summarize(per_step);
}

FeatureVector ExtractFeatures(const corpus::FrameClip& clip) {
  corpus::ValidateClip(clip);
  FeatureVector v;
  v.video_id = clip.source_id;
  for (const auto& f : clip.frames) {
    v.colorfulness += Colorfulness(f);
    const Stat y = MeanStd(Luma255(f));
    v.brightness += y.mean;
    v.contrast += y.std;
  }
  const auto n = static_cast<double>(clip.frames.size());
  v.colorfulness /= n;
  v.brightness /= n;
  v.contrast /= n;
  v.si = SpatialInformation(clip);
  v.ti = TemporalInformation(clip);
  return v;
}

FeatureTable NormalizeFeatures(std::vector<FeatureVector> raw) {
  FeatureTable t;
  t.raw = std::move(raw);
  t.normalized = t.raw;
  auto columns = [](FeatureVector& v) {
    return std::array<double*, 7>{&v.colorfulness, &v.brightness, &v.contrast,
                                  &v.si.mean,      &v.si.max,     &v.ti.mean,
                                  &v.ti.max};
  };
  for (std::size_t c = 0; c < 7; ++c) {
    double lo = INFINITY, hi = -INFINITY;
    for (auto& v : t.raw) {
      lo = std::min(lo, *columns(v)[c]);
      hi = std::max(hi, *columns(v)[c]);
    }
    for (auto& v : t.normalized) {
      double* x = columns(v)[c];
      *x = hi > lo ? (*x - lo) / (hi - lo) : 0.0;
    }
  }
  return t;
}

FeatureTable BuildFeatureTable(std::span<const corpus::VideoManifestEntry> manifest,
                               std::optional<std::size_t> resize_to) {
  std::vector<std::optional<FeatureVector>> rows(manifest.size());
  std::vector<std::string> errors(manifest.size());
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    try {
      rows[i] = ExtractFeatures(corpus::LoadAllFrames(manifest[i], resize_to));
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  std::vector<FeatureVector> ok;
  std::vector<FeatureFailure> failures;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (rows[i]) {
      ok.push_back(std::move(*rows[i]));
    } else {
      failures.push_back({manifest[i].video_id, errors[i]});
    }
  }
  FeatureTable t = NormalizeFeatures(std::move(ok));
  t.failures = std::move(failures);
  return t;
}

TsvTable FeaturesToTsv(std::span<const FeatureVector> rows) {
  TsvTable t({"video_id", "colorfulness", "brightness", "contrast", "si_mean",
              "si_max", "ti_mean", "ti_max"});
  for (const auto& v : rows) {
    t.AddRow({v.video_id, FormatDouble(v.colorfulness), FormatDouble(v.brightness),
              FormatDouble(v.contrast), FormatDouble(v.si.mean),
              FormatDouble(v.si.max), FormatDouble(v.ti.mean),
              FormatDouble(v.ti.max)});
  }
  return t;
}

}  // namespace finevq::features
