#pragma once

#include <array>
#include <span>
#include <vector>

#include "finevq/dimension.hpp"
#include "finevq/subjective/ratings.hpp"

namespace finevq::metrics {

// All correlation functions require equal lengths n >= 2 and finite values,
// and throw ValidationError on degenerate (constant) input.

// Mid-ranks (1-based); ties receive the mean of the ranks they span.
std::vector<double> AverageRanks(std::span<const double> v);

double Pearson(std::span<const double> x, std::span<const double> y);

// Pearson correlation of mid-ranks.
double Srcc(std::span<const double> x, std::span<const double> y);

// Kendall tau-b, O(n log n) (Knight's merge-sort counting).
double Krcc(std::span<const double> x, std::span<const double> y);

// f(x) = (b1 - b2) / (1 + exp(-(x - b3) / |b4|)) + b2
struct LogisticFit {
  std::array<double, 4> beta{};
  double residual = 0.0;  // sum of squared errors of the fitted map
  bool converged = false;

  double operator()(double x) const;
};

// Levenberg-Marquardt least squares from predictions to targets. Needs
// n >= 5. Starts from b1 = max target, b2 = min target, b3 = mean
// prediction, b4 = prediction std, plus a near-linear start; keeps the
// better one.
LogisticFit FitLogistic(std::span<const double> predictions,
                        std::span<const double> targets, int max_iterations = 200);

struct PlccResult {
  double value = 0.0;
  bool fitted = false;
  bool fallback = false;  // fitting requested but did not converge
  LogisticFit fit;
};

PlccResult Plcc(std::span<const double> predictions, std::span<const double> targets,
                bool fit_logistic);

// 6 x 6 SRCC between dimension MOS columns, in kAllDimensions order.
using DimensionMatrix = std::array<std::array<double, kNumDimensions>, kNumDimensions>;
DimensionMatrix DimensionCorrelationMatrix(const subjective::MosTable& mos);

}  // namespace finevq::metrics
