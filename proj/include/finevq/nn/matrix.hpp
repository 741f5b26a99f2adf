#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace finevq::nn {

// Dense row-major matrix of doubles with explicit shape.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix Gaussian(std::size_t rows, std::size_t cols, double stddev,
                         std::mt19937_64& rng);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  void Fill(double v);
  bool SameShape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  std::string ShapeString() const;
  bool AllFinite() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Dense helpers outside any autograd graph.
Matrix MatMul(const Matrix& a, const Matrix& b);
Matrix MatMulNT(const Matrix& a, const Matrix& b);  // a * b^T
Matrix Transpose(const Matrix& a);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
double MaxAbsDiff(const Matrix& a, const Matrix& b);

// Throws ValidationError("<what>: expected AxB, got CxD").
void CheckShape(const Matrix& m, std::size_t rows, std::size_t cols,
                const std::string& what);

}  // namespace finevq::nn
