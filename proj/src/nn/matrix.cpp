#include "finevq/nn/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "finevq/error.hpp"
#include "finevq/kernels/kernels.hpp"

namespace finevq::nn {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ValidationError("matrix data size " + std::to_string(data_.size()) +
                          " does not match " + std::to_string(rows) + "x" +
                          std::to_string(cols));
  }
}

Matrix Matrix::Gaussian(std::size_t rows, std::size_t cols, double stddev,
                        std::mt19937_64& rng) {
  Matrix m(rows, cols);
  std::normal_distribution<double> dist(0.0, stddev);
  for (double& v : m.data_) v = dist(rng);
  return m;
}

void Matrix::Fill(double v) { std::fill(data_.begin(), data_.end(), v); }

std::string Matrix::ShapeString() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

bool Matrix::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void CheckShape(const Matrix& m, std::size_t rows, std::size_t cols,
                const std::string& what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ValidationError(what + ": expected " + std::to_string(rows) + "x" +
                          std::to_string(cols) + ", got " + m.ShapeString());
  }
}

Matrix MatMul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ValidationError("matmul shape mismatch " + a.ShapeString() + " * " +
                          b.ShapeString());
  }
  Matrix c(a.rows(), b.cols());
  kernels::omp::MatMul(a.span(), b.span(), c.span(), a.rows(), a.cols(), b.cols());
  return c;
}

Matrix MatMulNT(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw ValidationError("matmul shape mismatch " + a.ShapeString() + " * (" +
                          b.ShapeString() + ")^T");
  }
  Matrix c(a.rows(), b.rows());
  kernels::omp::MatMulNT(a.span(), b.span(), c.span(), a.rows(), a.cols(), b.rows());
  return c;
}

Matrix Transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) t(c, r) = a(r, c);
  }
  return t;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  if (!a.SameShape(b)) throw ValidationError("add shape mismatch");
  Matrix c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += b[i];
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  if (!a.SameShape(b)) throw ValidationError("subtract shape mismatch");
  Matrix c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] -= b[i];
  return c;
}

double MaxAbsDiff(const Matrix& a, const Matrix& b) {
  if (!a.SameShape(b)) throw ValidationError("compare shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace finevq::nn
