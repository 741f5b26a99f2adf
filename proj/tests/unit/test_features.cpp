#include <cmath>
#include <filesystem>
#include <random>

#include <unistd.h>

#include "doctest.h"
#include "finevq/corpus/manifest.hpp"
#include "finevq/error.hpp"
#include "finevq/features/features.hpp"
#include "finevq/kernels/kernels.hpp"

using namespace finevq;
using namespace finevq::features;
using corpus::Frame;
using corpus::FrameClip;

namespace {

Frame Solid(std::size_t h, std::size_t w, double r, double g, double b) {
  Frame f(h, w);
  for (std::size_t i = 0; i < f.pixels(); ++i) {
    f.rgb[3 * i] = r;
    f.rgb[3 * i + 1] = g;
    f.rgb[3 * i + 2] = b;
  }
  return f;
}

Frame Texture(std::size_t n, std::uint64_t seed, double blur_passes = 0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.2, 0.8);
  Frame f(n, n);
  for (double& v : f.rgb) v = u(rng);
  for (int p = 0; p < blur_passes; ++p) {
    Frame g = f;
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t ch = 0; ch < 3; ++ch) {
          double acc = 0;
          int cnt = 0;
          for (int dr = -1; dr <= 1; ++dr) {
            for (int dc = -1; dc <= 1; ++dc) {
              const long rr = static_cast<long>(r) + dr, cc = static_cast<long>(c) + dc;
              if (rr < 0 || cc < 0 || rr >= static_cast<long>(n) || cc >= static_cast<long>(n)) continue;
              acc += f.at(rr, cc, ch);
              ++cnt;
            }
          }
          g.at(r, c, ch) = acc / cnt;
        }
      }
    }
    f = g;
  }
  return f;
}

double Y(const Frame& f, std::size_t r, std::size_t c) {
  return 255.0 * (0.299 * f.at(r, c, 0) + 0.587 * f.at(r, c, 1) + 0.114 * f.at(r, c, 2));
}

double PopStd(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

// Per-pixel Sobel magnitude std over interior pixels, written out longhand.
double SobelStdOracle(const Frame& f) {
  std::vector<double> mags;
  for (std::size_t r = 1; r + 1 < f.height; ++r) {
    for (std::size_t c = 1; c + 1 < f.width; ++c) {
      const double gx = (Y(f, r - 1, c + 1) + 2 * Y(f, r, c + 1) + Y(f, r + 1, c + 1)) -
                        (Y(f, r - 1, c - 1) + 2 * Y(f, r, c - 1) + Y(f, r + 1, c - 1));
      const double gy = (Y(f, r + 1, c - 1) + 2 * Y(f, r + 1, c) + Y(f, r + 1, c + 1)) -
                        (Y(f, r - 1, c - 1) + 2 * Y(f, r - 1, c) + Y(f, r - 1, c + 1));
      mags.push_back(std::sqrt(gx * gx + gy * gy));
    }
  }
  return PopStd(mags);
}

double ColorfulnessOracle(const Frame& f) {
  std::vector<double> rg, yb;
  for (std::size_t i = 0; i < f.pixels(); ++i) {
    const double r = 255 * f.rgb[3 * i], g = 255 * f.rgb[3 * i + 1], b = 255 * f.rgb[3 * i + 2];
    rg.push_back(r - g);
    yb.push_back((r + g) / 2 - b);
  }
  double mrg = 0, myb = 0;
  for (std::size_t i = 0; i < rg.size(); ++i) {
    mrg += rg[i];
    myb += yb[i];
  }
  mrg /= static_cast<double>(rg.size());
  myb /= static_cast<double>(yb.size());
  const double srg = PopStd(rg), syb = PopStd(yb);
  return std::sqrt(srg * srg + syb * syb) + 0.3 * std::sqrt(mrg * mrg + myb * myb);
}

FrameClip ClipOf(std::vector<Frame> frames) {
  FrameClip c;
  c.frames = std::move(frames);
  return c;
}

}  // namespace

TEST_CASE("colorfulness") {
  CHECK(Colorfulness(Solid(8, 8, 0.4, 0.4, 0.4)) == doctest::Approx(0.0));
  CHECK(Colorfulness(Solid(8, 8, 1, 0, 0)) ==
        doctest::Approx(0.3 * std::sqrt(255.0 * 255.0 + 127.5 * 127.5)));
  CHECK(Colorfulness(Solid(8, 8, 1, 0, 0)) == doctest::Approx(85.53).epsilon(1e-3));
  Frame check(8, 8);
  for (std::size_t r = 0; r < 8; ++r) {
    for (std::size_t c = 0; c < 8; ++c) check.at(r, c, (r + c) % 2) = 1.0;
  }
  CHECK(Colorfulness(check) == doctest::Approx(ColorfulnessOracle(check)).epsilon(1e-12));
  const Frame t = Texture(16, 3);
  CHECK(Colorfulness(t) == doctest::Approx(ColorfulnessOracle(t)).epsilon(1e-12));
}

TEST_CASE("brightness and contrast") {
  CHECK(Brightness(Solid(4, 4, 0, 0, 0)) == 0);
  CHECK(Contrast(Solid(4, 4, 0, 0, 0)) == 0);
  CHECK(Brightness(Solid(4, 4, 1, 1, 1)) == doctest::Approx(255));
  CHECK(Contrast(Solid(4, 4, 1, 1, 1)) == doctest::Approx(0).epsilon(1e-9));
  Frame half(4, 4);
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      for (std::size_t ch = 0; ch < 3; ++ch) half.at(r, c, ch) = 1;
    }
  }
  CHECK(Brightness(half) == doctest::Approx(127.5));
  CHECK(Contrast(half) == doctest::Approx(127.5));
}

TEST_CASE("spatial and temporal information") {
  const auto gray = ClipOf({Solid(8, 8, 0.5, 0.5, 0.5), Solid(8, 8, 0.5, 0.5, 0.5)});
  CHECK(SpatialInformation(gray).mean == doctest::Approx(0));
  CHECK(TemporalInformation(gray).max == doctest::Approx(0));
  const Frame t = Texture(16, 11);
  const auto stat = ClipOf({t, t, t});
  CHECK(TemporalInformation(stat).mean == 0);
  CHECK(TemporalInformation(stat).max == 0);
  CHECK(TemporalInformation(ClipOf({t})).mean == 0);
  Frame edge(10, 10);
  for (std::size_t r = 0; r < 10; ++r) {
    for (std::size_t c = 5; c < 10; ++c) {
      for (std::size_t ch = 0; ch < 3; ++ch) edge.at(r, c, ch) = 1;
    }
  }
  CHECK(SpatialInformation(ClipOf({edge})).mean ==
        doctest::Approx(SobelStdOracle(edge)).epsilon(1e-12));
  const auto two = ClipOf({edge, t.height == 10 ? t : Texture(10, 4)});
  const auto si = SpatialInformation(two);
  CHECK(si.max >= si.mean);
  CHECK_THROWS_AS(SpatialInformation(FrameClip{}), Error);
}

TEST_CASE("SI decreases with blur") {
  double prev = 1e9;
  for (int level = 0; level < 5; ++level) {
    const double si = SpatialInformation(ClipOf({Texture(32, 5, level)})).mean;
    CHECK(si < prev);
    prev = si;
  }
}

TEST_CASE("invariances") {
  const Frame a = Texture(16, 1), b = Texture(16, 2);
  const auto ab = ExtractFeatures(ClipOf({a, b, a}));
  const auto ba = ExtractFeatures(ClipOf({b, a, a}));
  CHECK(ab.colorfulness == doctest::Approx(ba.colorfulness).epsilon(1e-12));
  CHECK(ab.si.mean == doctest::Approx(ba.si.mean).epsilon(1e-12));
  CHECK(ab.brightness == doctest::Approx(ba.brightness).epsilon(1e-12));
  // In-gamut constant shift: everything but brightness is unchanged.
  auto shift = [](Frame f) {
    for (double& v : f.rgb) v += 0.1;
    return f;
  };
  const auto s = ExtractFeatures(ClipOf({shift(a), shift(b)}));
  const auto o = ExtractFeatures(ClipOf({a, b}));
  CHECK(s.colorfulness == doctest::Approx(o.colorfulness).epsilon(1e-9));
  CHECK(s.contrast == doctest::Approx(o.contrast).epsilon(1e-9));
  CHECK(s.si.mean == doctest::Approx(o.si.mean).epsilon(1e-9));
  CHECK(s.ti.mean == doctest::Approx(o.ti.mean).epsilon(1e-9));
  CHECK(s.brightness != doctest::Approx(o.brightness));
}

TEST_CASE("min-max normalization") {
  FeatureVector one;
  one.video_id = "a";
  one.si = {10, 12};
  auto t = NormalizeFeatures({one});
  CHECK(t.normalized[0].si.mean == 0);
  CHECK(t.normalized[0].colorfulness == 0);
  FeatureVector two = one;
  two.video_id = "b";
  two.si = {20, 30};
  t = NormalizeFeatures({one, two});
  CHECK(t.normalized[0].si.mean == 0);
  CHECK(t.normalized[1].si.mean == 1);
  for (const auto& f : t.normalized) {
    for (double v : {f.colorfulness, f.brightness, f.contrast, f.si.mean, f.si.max, f.ti.mean, f.ti.max}) {
      CHECK(v >= 0);
      CHECK(v <= 1);
    }
  }
}

TEST_CASE("feature table records failures and continues") {
  const auto dir = std::filesystem::temp_directory_path() / ("finevq_feat_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  corpus::WritePngSequence({Texture(16, 1), Texture(16, 2)}, dir / "ok");
  std::vector<corpus::VideoManifestEntry> m(2);
  m[0].video_id = "ok";
  m[0].frames_path = dir / "ok";
  m[0].frame_count = 2;
  m[1].video_id = "bad";
  m[1].frames_path = dir / "missing";
  m[1].frame_count = 2;
  const auto t = BuildFeatureTable(m);
  CHECK(t.raw.size() == 1);
  CHECK(t.failures.size() == 1);
  CHECK(t.failures[0].video_id == "bad");
  CHECK(FeaturesToTsv(t.raw).size() == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("serial and omp kernels agree") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  for (auto [n, k, m] : {std::tuple{1, 1, 1}, {7, 5, 3}, {33, 17, 65}, {64, 64, 64}}) {
    std::vector<double> a(n * k), b(k * m), c1(n * m), c2(n * m);
    for (double& v : a) v = g(rng);
    for (double& v : b) v = g(rng);
    kernels::serial::MatMul(a, b, c1, n, k, m);
    kernels::omp::MatMul(a, b, c2, n, k, m);
    CHECK(c1 == c2);
    std::vector<double> bt(m * k);
    for (double& v : bt) v = g(rng);
    kernels::serial::MatMulNT(a, bt, c1, n, k, m);
    kernels::omp::MatMulNT(a, bt, c2, n, k, m);
    CHECK(c1 == c2);
    std::vector<double> at(k * n), d1(n * m, 1.0), d2(n * m, 1.0);
    for (double& v : at) v = g(rng);
    kernels::serial::MatMulTN(at, b, d1, n, k, m, true);
    kernels::omp::MatMulTN(at, b, d2, n, k, m, true);
    CHECK(d1 == d2);
    // Against a longhand product.
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        double acc = 0;
        for (int p = 0; p < k; ++p) acc += a[i * k + p] * b[p * m + j];
        kernels::serial::MatMul(a, b, c1, n, k, m);
        CHECK(c1[i * m + j] == doctest::Approx(acc).epsilon(1e-12));
      }
      if (n > 8) break;
    }
  }
  const Frame f = Texture(24, 9);
  std::vector<double> y1(f.pixels()), y2(f.pixels());
  kernels::serial::Luma(f.rgb, y1);
  kernels::omp::Luma(f.rgb, y2);
  CHECK(y1 == y2);
  std::vector<double> s1(22 * 22), s2(22 * 22);
  kernels::serial::SobelMagnitude(y1, 24, 24, s1);
  kernels::omp::SobelMagnitude(y1, 24, 24, s2);
  CHECK(s1 == s2);
  std::vector<double> r1(10 * 13 * 3), r2(10 * 13 * 3);
  kernels::serial::ResizeBilinear(f.rgb, 24, 24, 3, r1, 10, 13);
  kernels::omp::ResizeBilinear(f.rgb, 24, 24, 3, r2, 10, 13);
  CHECK(r1 == r2);
}
