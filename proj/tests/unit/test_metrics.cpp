#include <cmath>
#include <random>

#include "doctest.h"
#include "finevq/error.hpp"
#include "finevq/metrics/accuracy.hpp"
#include "finevq/metrics/correlation.hpp"
#include "finevq/metrics/report.hpp"
#include "oracles.hpp"

using namespace finevq;
using namespace finevq::metrics;

namespace {

std::vector<double> RandomLevels(std::mt19937_64& rng, std::size_t n, int hi) {
  std::uniform_int_distribution<int> d(1, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

bool Constant(const std::vector<double>& v) {
  for (double x : v) {
    if (x != v[0]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("worked SRCC and KRCC values") {
  const std::vector<double> x = {1, 2, 3, 4, 5}, y = {2, 1, 4, 3, 5};
  CHECK(Srcc(x, y) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(Krcc(x, y) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(Srcc(x, x) == doctest::Approx(1.0));
  std::vector<double> rev(x.rbegin(), x.rend());
  CHECK(Srcc(x, rev) == doctest::Approx(-1.0));
  CHECK(Krcc(x, x) == doctest::Approx(1.0));
}

TEST_CASE("KRCC tau-b with ties") {
  const std::vector<double> x = {1, 2, 3}, y = {1, 1, 2};
  CHECK(Krcc(x, y) == doctest::Approx(2.0 / std::sqrt(6.0)).epsilon(1e-14));
  CHECK(Krcc(x, y) == doctest::Approx(oracle::KendallTauB(x, y)).epsilon(1e-14));
}

TEST_CASE("mid ranks") {
  const std::vector<double> v = {10, 20, 20, 5};
  const auto r = AverageRanks(v);
  CHECK(r == std::vector<double>{2, 3.5, 3.5, 1});
}

TEST_CASE("degenerate input raises") {
  const std::vector<double> c = {3, 3, 3}, x = {1, 2, 3};
  CHECK_THROWS_AS(Srcc(c, x), Error);
  CHECK_THROWS_AS(Krcc(x, c), Error);
  CHECK_THROWS_AS(Pearson(c, x), Error);
  CHECK_THROWS_AS(Srcc(std::vector<double>{1}, std::vector<double>{1}), Error);
  CHECK_THROWS_AS(Srcc(x, std::vector<double>{1, 2}), Error);
}

TEST_CASE("rank metrics agree with brute-force oracles on random small vectors") {
  std::mt19937_64 rng(5);
  int checked = 0;
  for (int c = 0; c < 3000; ++c) {
    const std::size_t n = 2 + rng() % 6;
    const auto x = RandomLevels(rng, n, 5), y = RandomLevels(rng, n, 5);
    if (Constant(x) || Constant(y)) continue;
    CHECK(std::fabs(Srcc(x, y) - oracle::SpearmanByRanks(x, y)) <= 1e-12);
    CHECK(std::fabs(Krcc(x, y) - oracle::KendallTauB(x, y)) <= 1e-12);
    ++checked;
  }
  CHECK(checked > 2000);
}

TEST_CASE("distinct values: SRCC matches the closed form") {
  std::mt19937_64 rng(9);
  for (int c = 0; c < 500; ++c) {
    const std::size_t n = 2 + rng() % 6;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] = static_cast<double>(i);
    std::shuffle(x.begin(), x.end(), rng);
    std::shuffle(y.begin(), y.end(), rng);
    CHECK(Srcc(x, y) == doctest::Approx(oracle::SpearmanClosedForm(x, y)).epsilon(1e-14));
  }
}

TEST_CASE("rank metrics are invariant under strictly monotone transforms") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int c = 0; c < 100; ++c) {
    std::vector<double> x(12), y(12), fx(12);
    for (int i = 0; i < 12; ++i) {
      x[i] = g(rng);
      y[i] = x[i] + g(rng);
      fx[i] = std::exp(3 * x[i]) + 7;
    }
    CHECK(Srcc(fx, y) == doctest::Approx(Srcc(x, y)).epsilon(1e-12));
    CHECK(Krcc(fx, y) == doctest::Approx(Krcc(x, y)).epsilon(1e-12));
    std::vector<double> nx(12);
    for (int i = 0; i < 12; ++i) nx[i] = -x[i];
    CHECK(Srcc(nx, y) == doctest::Approx(-Srcc(x, y)).epsilon(1e-12));
    CHECK(Krcc(nx, y) == doctest::Approx(-Krcc(x, y)).epsilon(1e-12));
    CHECK(Pearson(nx, y) == doctest::Approx(-Pearson(x, y)).epsilon(1e-12));
  }
}

TEST_CASE("PLCC") {
  std::vector<double> p = {1, 2, 3, 4, 5, 6, 7}, t(7), anti(7);
  for (int i = 0; i < 7; ++i) {
    t[i] = 3 * p[i] + 2;
    anti[i] = -2 * p[i] + 1;
  }
  CHECK(Plcc(p, t, false).value == doctest::Approx(1.0));
  CHECK(Plcc(p, anti, false).value == doctest::Approx(-1.0));

  SUBCASE("exact logistic data fits to 1") {
    std::vector<double> x, y;
    for (int i = 0; i < 30; ++i) {
      x.push_back(i * 0.5);
      y.push_back((90.0 - 10.0) / (1.0 + std::exp(-(x.back() - 7.0) / 1.5)) + 10.0);
    }
    const auto r = Plcc(x, y, true);
    CHECK(r.fitted);
    CHECK_FALSE(r.fallback);
    CHECK(std::fabs(r.value - 1.0) < 1e-6);
  }
  SUBCASE("fit never does worse than identity-free linear start") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    std::vector<double> x, y;
    for (int i = 0; i < 40; ++i) {
      x.push_back(g(rng));
      y.push_back(50 + 20 * std::tanh(x.back()) + 3 * g(rng));
    }
    const auto fit = FitLogistic(x, y);
    double ss_id = 0;
    for (std::size_t i = 0; i < x.size(); ++i) ss_id += (y[i] - x[i]) * (y[i] - x[i]);
    CHECK(fit.residual <= ss_id);
    // monotone map
    for (double a = -3; a < 3; a += 0.25) CHECK(fit(a + 0.25) >= fit(a));
  }
  CHECK_THROWS_AS(Plcc(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 4}, true), Error);
}

TEST_CASE("PLCC without fitting is invariant under positive affine maps") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  std::vector<double> x(20), y(20), ax(20);
  for (int i = 0; i < 20; ++i) {
    x[i] = g(rng);
    y[i] = x[i] * x[i] + g(rng);
    ax[i] = 4 * x[i] - 9;
  }
  CHECK(Plcc(ax, y, false).value == doctest::Approx(Plcc(x, y, false).value).epsilon(1e-12));
}

TEST_CASE("attribute accuracy") {
  CHECK(AnswerCorrect("Yes, there is noise", "yes", QuestionType::kYesNo));
  CHECK_FALSE(AnswerCorrect("no", "yes", QuestionType::kYesNo));
  CHECK_FALSE(AnswerCorrect("maybe", "no", QuestionType::kYesNo));
  CHECK(AnswerCorrect("blur, artifact", "artifact, blur", QuestionType::kWhich));
  CHECK(AnswerCorrect("Blur and artifact.", "artifact, blur", QuestionType::kWhich));
  CHECK_FALSE(AnswerCorrect("blur", "artifact, blur", QuestionType::kWhich));
  std::vector<std::pair<std::string, std::string>> answers;
  for (int i = 0; i < 100; ++i) answers.push_back({i < 50 ? "yes" : "no", "yes"});
  CHECK(AttributeAccuracy(answers, QuestionType::kYesNo) == 0.5);
  CHECK_THROWS(AttributeAccuracy({}, QuestionType::kYesNo));
}

TEST_CASE("dimension correlation matrix") {
  subjective::MosTable mos;
  std::mt19937_64 rng(4);
  std::vector<double> overall;
  for (int v = 0; v < 200; ++v) overall.push_back(static_cast<double>(rng() % 10000) / 100);
  auto temporal = overall;
  std::shuffle(temporal.begin(), temporal.end(), rng);
  for (int v = 0; v < 200; ++v) {
    const std::string id = "v" + std::to_string(1000 + v);
    for (Dimension d : kAllDimensions) {
      double m = overall[v];
      if (d == Dimension::kTemporal) m = temporal[v];
      if (d == Dimension::kColor) m = 100 - overall[v];
      mos.Set(id, d, {m, 0, 1});
    }
  }
  const auto m = DimensionCorrelationMatrix(mos);
  for (std::size_t a = 0; a < kNumDimensions; ++a) {
    CHECK(m[a][a] == doctest::Approx(1.0));
    for (std::size_t b = 0; b < kNumDimensions; ++b) CHECK(m[a][b] == m[b][a]);
  }
  CHECK(m[Index(Dimension::kNoise)][Index(Dimension::kOverall)] == doctest::Approx(1.0));
  CHECK(m[Index(Dimension::kColor)][Index(Dimension::kOverall)] == doctest::Approx(-1.0));
  CHECK(std::fabs(m[Index(Dimension::kTemporal)][Index(Dimension::kOverall)]) < 0.3);
}

TEST_CASE("report JSON round-trip and layout") {
  EvalReport r;
  r.split_id = "test";
  r.seed = 3;
  r.model_id = "m";
  r.dimensions[Index(Dimension::kOverall)] = DimensionScores{0.9, 0.7, 0.8, false, 10};
  r.dimensions[Index(Dimension::kColor)] = DimensionScores{0.5, 0.4, 0.45, true, 10};
  r.accuracy["yesno"] = 0.75;
  const auto j = ReportToJson(r);
  const auto back = ReportFromJson(nlohmann::json::parse(j.dump()));
  CHECK(back.split_id == "test");
  CHECK(back.dimensions[Index(Dimension::kOverall)]->srcc == 0.9);
  CHECK(back.dimensions[Index(Dimension::kColor)]->plcc_fallback);
  CHECK_FALSE(back.dimensions[Index(Dimension::kBlur)].has_value());
  CHECK(back.accuracy.at("yesno") == 0.75);
  CHECK(ReportToJson(back).dump() == j.dump());
}
