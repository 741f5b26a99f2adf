#pragma once

#include <cstddef>
#include <random>
#include <string>

#include "finevq/nn/params.hpp"

namespace finevq::model {

using nn::Matrix;

// y = x W^T (+ bias) (+ x B^T A^T when adapted). W is out x in, A is
// out x r, B is r x in, so the effective weight is W + A B. Rows of x are
// independent inputs.
struct Linear {
  nn::Param* w = nullptr;
  nn::Param* bias = nullptr;
  nn::Param* lora_a = nullptr;
  nn::Param* lora_b = nullptr;

  std::size_t in() const { return w->value.cols(); }
  std::size_t out() const { return w->value.rows(); }
  bool adapted() const { return lora_a != nullptr; }
  std::size_t rank() const { return adapted() ? lora_a->value.cols() : 0; }
};

struct LinearSpec {
  std::size_t in = 0;
  std::size_t out = 0;
  double w_std = 0.0;  // 0 selects 1/sqrt(in)
  bool bias = false;
  bool trainable = false;
  std::size_t lora_rank = 0;  // 0 = no adapter
};

inline constexpr double kLoraInitStd = 0.02;

// Registers name.w, name.b, name.lora_a and name.lora_b as needed. LoRA A is
// N(0, 0.02) and B is zero, so a fresh adapter leaves the layer unchanged.
Linear MakeLinear(nn::ParamStore& store, const std::string& name, const LinearSpec& spec,
                  std::mt19937_64& rng);

nn::Var Apply(nn::Tape& t, const Linear& layer, nn::Var x);

// Plain numeric LoRA, outside any graph.
// Factored: x W^T + (x B^T) A^T; never forms A B.
Matrix LoraForward(const Matrix& w, const Matrix& a, const Matrix& b, const Matrix& x);
// W + A B.
Matrix MergeLora(const Matrix& w, const Matrix& a, const Matrix& b);
// r (n + m) for an n x m base weight.
std::size_t LoraTrainableCount(std::size_t n, std::size_t m, std::size_t r);

}  // namespace finevq::model
