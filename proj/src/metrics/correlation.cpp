#include "finevq/metrics/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "finevq/error.hpp"

namespace finevq::metrics {

namespace {

void CheckPairs(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw ValidationError("prediction/target length mismatch: " +
                          std::to_string(x.size()) + " vs " +
                          std::to_string(y.size()));
  }
  if (x.size() < 2) throw ValidationError("need at least 2 score pairs");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw ValidationError("non-finite score at index " + std::to_string(i));
    }
  }
}

bool IsConstant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double a) { return a == v[0]; });
}

// Merge sort on `v` returning the number of inversions (pairs i < j with
// v[i] > v[j]).
std::uint64_t CountInversions(std::vector<double>& v) {
  std::vector<double> buf(v.size());
  std::uint64_t swaps = 0;
  for (std::size_t width = 1; width < v.size(); width *= 2) {
    for (std::size_t lo = 0; lo < v.size(); lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, v.size());
      const std::size_t hi = std::min(lo + 2 * width, v.size());
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (v[j] < v[i]) {
          swaps += mid - i;
          buf[k++] = v[j++];
        } else {
          buf[k++] = v[i++];
        }
      }
      while (i < mid) buf[k++] = v[i++];
      while (j < hi) buf[k++] = v[j++];
    }
    std::swap(v, buf);
  }
  return swaps;
}

// Sum over runs of equal adjacent values of t (t - 1) / 2.
template <typename Eq>
std::uint64_t TiePairs(std::size_t n, Eq equal) {
  std::uint64_t total = 0, run = 1;
  for (std::size_t i = 1; i < n; ++i) {
    if (equal(i - 1, i)) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  return total + run * (run - 1) / 2;
}

}  // namespace

std::vector<double> AverageRanks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double Pearson(std::span<const double> x, std::span<const double> y) {
  CheckPairs(x, y);
  if (IsConstant(x) || IsConstant(y)) {
    throw ValidationError("Pearson correlation of constant input is undefined");
  }
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) {
    throw ValidationError("Pearson correlation of constant input is undefined");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double Srcc(std::span<const double> x, std::span<const double> y) {
  CheckPairs(x, y);
  if (IsConstant(x) || IsConstant(y)) {
    throw ValidationError("SRCC of constant input is undefined");
  }
  const auto rx = AverageRanks(x), ry = AverageRanks(y);
  return Pearson(rx, ry);
}

double Krcc(std::span<const double> x, std::span<const double> y) {
  CheckPairs(x, y);
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x[order[i]];
    ys[i] = y[order[i]];
  }
  const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const std::uint64_t x_ties =
      TiePairs(n, [&](std::size_t a, std::size_t b) { return xs[a] == xs[b]; });
  const std::uint64_t joint_ties = TiePairs(n, [&](std::size_t a, std::size_t b) {
    return xs[a] == xs[b] && ys[a] == ys[b];
  });
  const std::uint64_t discordant = CountInversions(ys);  // ys is now sorted
  const std::uint64_t y_ties =
      TiePairs(n, [&](std::size_t a, std::size_t b) { return ys[a] == ys[b]; });
  if (x_ties == n0 || y_ties == n0) {
    throw ValidationError("Kendall tau-b of all-tied input is undefined");
  }
  const double numer = static_cast<double>(n0) - static_cast<double>(x_ties) -
                       static_cast<double>(y_ties) +
                       static_cast<double>(joint_ties) -
                       2.0 * static_cast<double>(discordant);
  // One square root of the product keeps the untied case exact.
  const double denom = std::sqrt(static_cast<double>(n0 - x_ties) *
                                 static_cast<double>(n0 - y_ties));
  return std::clamp(numer / denom, -1.0, 1.0);
}

// --- Logistic mapping ------------------------------------------------------

double LogisticFit::operator()(double x) const {
  const double s = std::max(std::abs(beta[3]), 1e-12);
  const double u = std::clamp(-(x - beta[2]) / s, -700.0, 700.0);
  return (beta[0] - beta[1]) / (1.0 + std::exp(u)) + beta[1];
}

namespace {

double Sse(const LogisticFit& f, std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f(x[i]);
    s += r * r;
  }
  return s;
}

// Solves the 4x4 system in place with partial pivoting; false if singular.
bool Solve4(std::array<std::array<double, 4>, 4> a, std::array<double, 4>& b) {
  for (int c = 0; c < 4; ++c) {
    int piv = c;
    for (int r = c + 1; r < 4; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (std::abs(a[piv][c]) < 1e-300) return false;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (int r = c + 1; r < 4; ++r) {
      const double f = a[r][c] / a[c][c];
      for (int k = c; k < 4; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  for (int c = 3; c >= 0; --c) {
    for (int k = c + 1; k < 4; ++k) b[c] -= a[c][k] * b[k];
    b[c] /= a[c][c];
  }
  return true;
}

LogisticFit RunLevenbergMarquardt(std::array<double, 4> beta,
                                  std::span<const double> x,
                                  std::span<const double> y, int max_iterations) {
  LogisticFit fit;
  fit.beta = beta;
  double sse = Sse(fit, x, y);
  double lambda = 1e-3;
  for (int it = 0; it < max_iterations; ++it) {
    std::array<std::array<double, 4>, 4> jtj{};
    std::array<double, 4> jtr{};
    const double s = std::max(std::abs(fit.beta[3]), 1e-12);
    const double sign = fit.beta[3] < 0 ? -1.0 : 1.0;
    const double amp = fit.beta[0] - fit.beta[1];
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double u = std::clamp(-(x[i] - fit.beta[2]) / s, -700.0, 700.0);
      const double g = 1.0 / (1.0 + std::exp(u));
      const double gp = g * (1.0 - g);
      const std::array<double, 4> jac = {
          g, 1.0 - g, -amp * gp / s, -amp * gp * (x[i] - fit.beta[2]) / (s * s) * sign};
      const double r = y[i] - (amp * g + fit.beta[1]);
      for (int a = 0; a < 4; ++a) {
        jtr[a] += jac[a] * r;
        for (int b = 0; b < 4; ++b) jtj[a][b] += jac[a] * jac[b];
      }
    }
    bool improved = false;
    for (int attempt = 0; attempt < 30 && !improved; ++attempt) {
      auto lhs = jtj;
      for (int a = 0; a < 4; ++a) lhs[a][a] += lambda * std::max(jtj[a][a], 1e-12);
      auto step = jtr;
      if (!Solve4(lhs, step)) {
        lambda *= 10.0;
        continue;
      }
      LogisticFit trial = fit;
      for (int a = 0; a < 4; ++a) trial.beta[a] += step[a];
      const double trial_sse = Sse(trial, x, y);
      if (std::isfinite(trial_sse) && trial_sse <= sse) {
        const double rel = (sse - trial_sse) / std::max(sse, 1e-300);
        fit = trial;
        sse = trial_sse;
        lambda = std::max(lambda * 0.3, 1e-12);
        improved = true;
        if (rel < 1e-12 || sse < 1e-24) {
          fit.residual = sse;
          fit.converged = true;
          return fit;
        }
      } else {
        lambda *= 10.0;
      }
    }
    if (!improved) {
      // No descent direction left: a stationary point.
      fit.residual = sse;
      fit.converged = true;
      return fit;
    }
  }
  fit.residual = sse;
  fit.converged = false;
  return fit;
}

}  // namespace

LogisticFit FitLogistic(std::span<const double> predictions,
                        std::span<const double> targets, int max_iterations) {
  CheckPairs(predictions, targets);
  if (predictions.size() < 5) {
    throw ValidationError("logistic fitting needs at least 5 pairs");
  }
  const auto n = static_cast<double>(predictions.size());
  const double mx = std::accumulate(predictions.begin(), predictions.end(), 0.0) / n;
  const double my = std::accumulate(targets.begin(), targets.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    sxx += (predictions[i] - mx) * (predictions[i] - mx);
    sxy += (predictions[i] - mx) * (targets[i] - my);
  }
  if (sxx <= 0.0) throw ValidationError("logistic fit of constant predictions");
  const double sd = std::sqrt(sxx / n);

  const auto [tmin, tmax] = std::minmax_element(targets.begin(), targets.end());
  LogisticFit a = RunLevenbergMarquardt({*tmax, *tmin, mx, sd}, predictions,
                                        targets, max_iterations);

  // Near-linear start reproducing the least-squares line over the range.
  const double slope = sxy / sxx;
  const auto [pmin, pmax] = std::minmax_element(predictions.begin(), predictions.end());
  const double s = 10.0 * (*pmax - *pmin);
  const double centre = my;
  LogisticFit b = RunLevenbergMarquardt(
      {centre + 2.0 * s * slope, centre - 2.0 * s * slope, mx, s}, predictions,
      targets, max_iterations);

  if (!a.converged && b.converged) return b;
  if (a.converged && !b.converged) return a;
  return a.residual <= b.residual ? a : b;
}

PlccResult Plcc(std::span<const double> predictions, std::span<const double> targets,
                bool fit_logistic) {
  PlccResult res;
  if (!fit_logistic) {
    res.value = Pearson(predictions, targets);
    return res;
  }
  res.fit = FitLogistic(predictions, targets);
  if (res.fit.converged) {
    std::vector<double> mapped(predictions.size());
    for (std::size_t i = 0; i < mapped.size(); ++i) mapped[i] = res.fit(predictions[i]);
    if (!IsConstant(mapped)) {
      res.value = Pearson(mapped, targets);
      res.fitted = true;
      return res;
    }
  }
  res.fallback = true;
  res.value = Pearson(predictions, targets);
  return res;
}

DimensionMatrix DimensionCorrelationMatrix(const subjective::MosTable& mos) {
  std::array<std::vector<double>, kNumDimensions> cols;
  for (Dimension d : kAllDimensions) cols[Index(d)] = mos.Column(d);
  DimensionMatrix m{};
  for (std::size_t a = 0; a < kNumDimensions; ++a) {
    m[a][a] = 1.0;
    for (std::size_t b = a + 1; b < kNumDimensions; ++b) {
      m[a][b] = m[b][a] = Srcc(cols[a], cols[b]);
    }
  }
  return m;
}

}  // namespace finevq::metrics
