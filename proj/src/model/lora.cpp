#include "finevq/model/lora.hpp"

#include <algorithm>
#include <cmath>

#include "finevq/error.hpp"

namespace finevq::model {

Linear MakeLinear(nn::ParamStore& store, const std::string& name, const LinearSpec& spec,
                  std::mt19937_64& rng) {
  const double std = spec.w_std > 0 ? spec.w_std : 1.0 / std::sqrt(static_cast<double>(spec.in));
  Linear l;
  l.w = &store.Add(name + ".w", Matrix::Gaussian(spec.out, spec.in, std, rng), spec.trainable);
  if (spec.bias) l.bias = &store.Add(name + ".b", Matrix(1, spec.out), spec.trainable);
  if (spec.lora_rank > 0) {
    if (spec.lora_rank > std::min(spec.in, spec.out)) {
      throw ValidationError("LoRA rank " + std::to_string(spec.lora_rank) + " exceeds " +
                            name + " size");
    }
    l.lora_a = &store.Add(name + ".lora_a",
                          Matrix::Gaussian(spec.out, spec.lora_rank, kLoraInitStd, rng), true);
    l.lora_b = &store.Add(name + ".lora_b", Matrix(spec.lora_rank, spec.in), true);
  }
  return l;
}

nn::Var Apply(nn::Tape& t, const Linear& layer, nn::Var x) {
  nn::Var y = nn::MatMulNT(t, x, t.Leaf(*layer.w));
  if (layer.adapted()) {
    nn::Var low = nn::MatMulNT(t, x, t.Leaf(*layer.lora_b));
    y = nn::Add(t, y, nn::MatMulNT(t, low, t.Leaf(*layer.lora_a)));
  }
  if (layer.bias) y = nn::AddRowVector(t, y, t.Leaf(*layer.bias));
  return y;
}

Matrix LoraForward(const Matrix& w, const Matrix& a, const Matrix& b, const Matrix& x) {
  if (a.rows() != w.rows() || b.cols() != w.cols() || a.cols() != b.rows()) {
    throw ValidationError("LoRA shape mismatch: W " + w.ShapeString() + ", A " +
                          a.ShapeString() + ", B " + b.ShapeString());
  }
  if (x.cols() != w.cols()) {
    throw ValidationError("LoRA input has " + std::to_string(x.cols()) + " columns, expected " +
                          std::to_string(w.cols()));
  }
  return nn::MatMulNT(x, w) + nn::MatMulNT(nn::MatMulNT(x, b), a);
}

Matrix MergeLora(const Matrix& w, const Matrix& a, const Matrix& b) {
  if (a.rows() != w.rows() || b.cols() != w.cols() || a.cols() != b.rows()) {
    throw ValidationError("LoRA shape mismatch: W " + w.ShapeString() + ", A " +
                          a.ShapeString() + ", B " + b.ShapeString());
  }
  return w + nn::MatMul(a, b);
}

std::size_t LoraTrainableCount(std::size_t n, std::size_t m, std::size_t r) {
  return r * (n + m);
}

}  // namespace finevq::model
