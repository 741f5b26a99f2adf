#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "finevq/nn/matrix.hpp"

namespace finevq::nn {

// A named tensor owned by a model. Frozen parameters never receive gradients
// and are never touched by the optimizer.
struct Param {
  std::string name;
  Matrix value;
  Matrix grad;
  bool trainable = false;
  // AdamW moments.
  Matrix m;
  Matrix v;

  void ZeroGrad();
};

struct Var {
  std::size_t id = 0;
};

// Reverse-mode tape over matrices. Nodes that do not depend on a trainable
// parameter carry no gradient and are skipped during Backward.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  // With grad disabled every node is a constant (inference mode).
  explicit Tape(bool enable_grad = true) : enable_grad_(enable_grad) {}
  bool grad_enabled() const { return enable_grad_; }

  Var Constant(Matrix value);
  Var Leaf(Param& p);

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Gradient buffer of a node, allocated (zeroed) on first access.
  Matrix& grad(std::size_t id);
  Matrix& grad(Var v) { return grad(v.id); }
  bool has_grad(std::size_t id) const { return !nodes_[id].grad.empty(); }

  Var Push(Matrix value, bool requires_grad, BackwardFn backward);

  // Drops every node from index n on; earlier Vars stay valid.
  void Truncate(std::size_t n) { nodes_.resize(std::min(n, nodes_.size())); }

  // Seeds d(out)/d(out) = 1 for a 1x1 output and accumulates into the
  // trainable parameters' grad fields.
  void Backward(Var out);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    BackwardFn backward;
    Param* param = nullptr;
  };
  std::vector<Node> nodes_;
  bool enable_grad_ = true;
};

// --- Ops --------------------------------------------------------------------

Var MatMul(Tape& t, Var a, Var b);    // a * b
Var MatMulNT(Tape& t, Var a, Var b);  // a * b^T
Var Add(Tape& t, Var a, Var b);
Var AddRowVector(Tape& t, Var a, Var row);  // row is 1 x cols
Var Scale(Tape& t, Var a, double s);
Var ScaleShift(Tape& t, Var a, double scale, double shift);
Var Gelu(Tape& t, Var a);  // tanh approximation
Var LayerNorm(Tape& t, Var x, Var gamma, Var beta, double eps = 1e-5);
Var SliceRows(Tape& t, Var a, std::size_t begin, std::size_t count);
Var ConcatRows(Tape& t, std::span<const Var> parts);
Var GroupMeanRows(Tape& t, Var a, std::size_t group);
Var GatherRows(Tape& t, Var table, std::vector<int> ids);

// Rows of the key/value sequence visible to query row i:
//   j < prefix  or  !causal  or  j <= query_offset + i.
struct AttentionMask {
  bool causal = false;
  std::size_t prefix = 0;
  std::size_t query_offset = 0;

  bool Allowed(std::size_t i, std::size_t j) const {
    return !causal || j < prefix || j <= query_offset + i;
  }
};

// Multi-head scaled dot-product attention. q is nq x d, k and v are nk x d.
Var Attention(Tape& t, Var q, Var k, Var v, std::size_t heads, AttentionMask mask);

// Mean negative log-likelihood over rows whose label is >= 0. Returns 1x1.
Var LanguageLoss(Tape& t, Var logits, std::vector<int> labels);
// Mean |pred - target| over entries with mask set; 0 when the mask is empty.
// preds is k x 1.
Var MaskedL1(Tape& t, Var preds, std::vector<double> targets, std::vector<char> mask);
Var Sum(Tape& t, std::span<const Var> scalars);  // of 1x1 nodes

// Plain numeric versions used by tests and evaluation.
double LanguageLossValue(const Matrix& logits, std::span<const int> labels);
double L1LossValue(std::span<const double> preds, std::span<const double> targets,
                   std::span<const char> mask);

}  // namespace finevq::nn
