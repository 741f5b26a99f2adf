#include "finevq/harness/toy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "finevq/error.hpp"

namespace finevq::harness {

std::string_view ToString(ToyFamily f) {
  switch (f) {
    case ToyFamily::kNoise: return "noise";
    case ToyFamily::kBlur: return "blur";
    case ToyFamily::kArtifact: return "artifact";
    case ToyFamily::kTemporal: return "temporal";
  }
  return "?";
}

Dimension FamilyDimension(ToyFamily f) {
  switch (f) {
    case ToyFamily::kNoise: return Dimension::kNoise;
    case ToyFamily::kBlur: return Dimension::kBlur;
    case ToyFamily::kArtifact: return Dimension::kArtifact;
    case ToyFamily::kTemporal: return Dimension::kTemporal;
  }
  return Dimension::kOverall;
}

corpus::FrameClip AsClip(const ToyClip& c) {
  corpus::FrameClip clip;
  clip.frames = c.frames;
  clip.source_id = c.id;
  for (std::size_t i = 0; i < c.frames.size(); ++i) clip.indices.push_back(i);
  return clip;
}

namespace {

struct Wave {
  double u, v, phase, speed, amp;
  int channel_mask;  // bit c set: contributes to channel c
};

struct Scene {
  double base[3];
  std::vector<Wave> waves;

  double Eval(double x, double y, double t, int ch, double size) const {
    double s = base[ch];
    for (const auto& w : waves) {
      if (!(w.channel_mask >> ch & 1)) continue;
      s += w.amp * std::sin(2 * std::numbers::pi * (w.u * x + w.v * y) / size + w.phase +
                            w.speed * t);
    }
    return s;
  }
};

// Every clip shares one set of spatial frequencies, so spectra differ
// between clips mainly through the distortion; phases, drift speeds,
// amplitudes and colours vary per clip.
Scene MakeScene(std::mt19937_64& rng) {
  static constexpr double kFreq[6][2] = {{1, 2}, {3, -1}, {-2, 3}, {5, 4}, {-7, 6}, {9, -8}};
  static constexpr double kAmp[6] = {0.09, 0.08, 0.07, 0.05, 0.04, 0.035};
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Scene s;
  for (double& b : s.base) b = 0.35 + 0.3 * U(rng);
  for (int i = 0; i < 6; ++i) {
    Wave w;
    w.u = kFreq[i][0];
    w.v = kFreq[i][1];
    w.phase = 2 * std::numbers::pi * U(rng);
    w.speed = 0.18 + 0.06 * U(rng);
    w.amp = kAmp[i] * (0.85 + 0.3 * U(rng));
    w.channel_mask = i % 2 ? 7 : 1 + static_cast<int>(U(rng) * 6.999);
    s.waves.push_back(w);
  }
  return s;
}

void GaussianBlur(corpus::Frame& f, double sigma) {
  const int r = std::max(1, static_cast<int>(std::ceil(3 * sigma)));
  std::vector<double> k(2 * r + 1);
  double z = 0;
  for (int i = -r; i <= r; ++i) z += k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (double& v : k) v /= z;
  const int h = static_cast<int>(f.height), w = static_cast<int>(f.width);
  corpus::Frame tmp = f;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        double s = 0;
        for (int i = -r; i <= r; ++i) s += k[i + r] * f.at(y, std::clamp(x + i, 0, w - 1), c);
        tmp.at(y, x, c) = s;
      }
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        double s = 0;
        for (int i = -r; i <= r; ++i) s += k[i + r] * tmp.at(std::clamp(y + i, 0, h - 1), x, c);
        f.at(y, x, c) = s;
      }
    }
  }
}

void Blocking(corpus::Frame& f, double alpha, std::size_t block) {
  for (std::size_t by = 0; by < f.height; by += block) {
    for (std::size_t bx = 0; bx < f.width; bx += block) {
      for (int c = 0; c < 3; ++c) {
        double m = 0;
        std::size_t n = 0;
        for (std::size_t y = by; y < std::min(by + block, f.height); ++y) {
          for (std::size_t x = bx; x < std::min(bx + block, f.width); ++x, ++n) m += f.at(y, x, c);
        }
        m /= static_cast<double>(n);
        for (std::size_t y = by; y < std::min(by + block, f.height); ++y) {
          for (std::size_t x = bx; x < std::min(bx + block, f.width); ++x) {
            f.at(y, x, c) = (1 - alpha) * f.at(y, x, c) + alpha * m;
          }
        }
      }
    }
  }
}

}  // namespace

ToyClip MakeToyClip(const std::string& id, ToyFamily family, double severity,
                    std::size_t frames, std::size_t size, std::uint64_t seed) {
  if (frames == 0 || size < 4) throw ValidationError("toy clip needs frames and size >= 4");
  std::mt19937_64 rng(seed);
  const Scene scene = MakeScene(rng);
  std::normal_distribution<double> N(0.0, 1.0);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const double k = severity;
  const double scale = static_cast<double>(size) / 32.0;  // severities are set at 32x32

  ToyClip clip{id, family, severity, {}};
  const std::size_t phase3 = rng() % 3;
  for (std::size_t t = 0; t < frames; ++t) {
    // Temporal family: per-frame luminance flicker plus a small positional
    // jitter with random sign and magnitude near the severity's level.
    auto near = [&](double a) { return a * (U(rng) < 0 ? -1.0 : 1.0) * (0.875 + 0.125 * U(rng)); };
    double dx = 0, dy = 0, flicker = 0;
    if (family == ToyFamily::kTemporal) {
      dx = near((0.15 + 0.05 * k) * scale);
      dy = near((0.15 + 0.05 * k) * scale);
      // Period-3 pattern (+a, -a, 0): every frame pair at stride 2 or 8
      // differs, so pooled energy tracks a rather than sign luck.
      static constexpr double kPattern[3] = {1.0, -1.0, 0.0};
      flicker = (0.012 + 0.012 * k) * kPattern[(t + phase3) % 3];
    }
    corpus::Frame f(size, size);
    for (std::size_t y = 0; y < size; ++y) {
      for (std::size_t x = 0; x < size; ++x) {
        for (int c = 0; c < 3; ++c) {
          f.at(y, x, c) = scene.Eval(x / scale + dx / scale, y / scale + dy / scale,
                                     static_cast<double>(t), c, 32.0);
        }
      }
    }
    switch (family) {
      case ToyFamily::kNoise: {
        const double sigma = 0.015 + 0.025 * k;
        for (double& v : f.rgb) v += sigma * N(rng);
        break;
      }
      case ToyFamily::kBlur:
        GaussianBlur(f, (0.4 + 0.3 * k) * scale);
        break;
      case ToyFamily::kArtifact:
        Blocking(f, std::min(1.0, 0.3 + 0.1 * k), std::max<std::size_t>(2, 4 * scale));
        break;
      case ToyFamily::kTemporal:
        for (double& v : f.rgb) v += flicker;
        break;
    }
    for (double& v : f.rgb) v = std::clamp(v, 0.0, 1.0);
    clip.frames.push_back(std::move(f));
  }
  return clip;
}

double PlantedOverall(ToyFamily f, double severity) {
  return 90.0 - 10.0 * severity - 1.5 * static_cast<int>(f);
}

double PlantedFamilyMos(double severity) { return 88.0 - 11.0 * severity; }

const ToyClip& ToyCorpus::Find(const std::string& id) const {
  for (const auto& c : clips) {
    if (c.id == id) return c;
  }
  throw ValidationError("no toy clip '" + id + "'");
}

std::vector<std::string> ToyCorpus::ids() const {
  std::vector<std::string> out;
  for (const auto& c : clips) out.push_back(c.id);
  return out;
}

namespace {
std::string SeverityTag(double s) {
  const int tenths = static_cast<int>(std::lround(s * 10));
  return std::to_string(tenths / 10) + (tenths % 10 ? "p" + std::to_string(tenths % 10) : "");
}

std::string_view FamilyOption(ToyFamily f) {
  switch (f) {
    case ToyFamily::kNoise: return "grain";
    case ToyFamily::kBlur: return "defocus";
    case ToyFamily::kArtifact: return "blocking";
    case ToyFamily::kTemporal: return "flicker";
  }
  return "";
}
}  // namespace

ToyCorpus MakeToyCorpus(const ToyCorpusSpec& spec) {
  ToyCorpus corpus;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (ToyFamily fam : spec.families) {
    const auto custom = spec.family_severities.find(fam);
    const auto& severities =
        custom == spec.family_severities.end() ? spec.severities : custom->second;
    for (double sev : severities) {
      const std::string id = spec.id_prefix + "_" + std::string(ToString(fam)) + "_s" +
                             SeverityTag(sev);
      corpus.clips.push_back(MakeToyClip(id, fam, sev, spec.frames, spec.size, rng()));
      const Dimension fd = FamilyDimension(fam);
      for (Dimension d : kAllDimensions) {
        double m;
        if (d == Dimension::kOverall) {
          m = PlantedOverall(fam, sev);
        } else if (d == fd) {
          m = PlantedFamilyMos(sev);
        } else {
          m = 90.0 + 5.0 * U(rng);
        }
        corpus.mos.Set(id, d, {m, 0.0, 1});
        subjective::AggregatedLabels lab;
        lab.n_valid = 1;
        lab.labels = {d == fd ? std::string(FamilyOption(fam)) : std::string("none")};
        lab.counts[lab.labels[0]] = 1;
        if (d != Dimension::kOverall) corpus.labels.Set(id, d, std::move(lab));
      }
    }
  }
  return corpus;
}

ToyCorpusSpec AcceptanceTrainSpec(std::uint64_t seed) {
  ToyCorpusSpec s;
  s.seed = seed;
  return s;
}

ToyCorpusSpec AcceptanceHeldOutSpec(std::uint64_t seed) {
  ToyCorpusSpec s;
  s.seed = seed + 1000003;
  s.family_severities = {{ToyFamily::kNoise, {0.5, 4.5}},
                         {ToyFamily::kBlur, {1.5, 5.5}},
                         {ToyFamily::kArtifact, {2.5, 6.5}},
                         {ToyFamily::kTemporal, {3.5, 6.2}}};
  s.id_prefix = "held";
  return s;
}

}  // namespace finevq::harness
