#include "finevq/nn/tape.hpp"

#include <algorithm>
#include <cmath>

#include "finevq/error.hpp"
#include "finevq/kernels/kernels.hpp"

namespace finevq::nn {

namespace k = kernels::omp;

void Param::ZeroGrad() {
  if (!grad.SameShape(value)) grad = Matrix(value.rows(), value.cols());
  grad.Fill(0.0);
}

Var Tape::Constant(Matrix value) { return Push(std::move(value), false, nullptr); }

Var Tape::Leaf(Param& p) {
  Var v = Push(p.value, enable_grad_ && p.trainable, nullptr);
  nodes_[v.id].param = &p;
  return v;
}

Matrix& Tape::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty() && !n.value.empty()) n.grad = Matrix(n.value.rows(), n.value.cols());
  return n.grad;
}

Var Tape::Push(Matrix value, bool requires_grad, BackwardFn backward) {
  nodes_.push_back(Node{std::move(value), Matrix(), requires_grad,
                        requires_grad ? std::move(backward) : BackwardFn(), nullptr});
  return Var{nodes_.size() - 1};
}

void Tape::Backward(Var out) {
  CheckShape(value(out), 1, 1, "backward seed");
  if (!requires_grad(out)) return;
  grad(out)[0] = 1.0;
  for (std::size_t id = out.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.param) {
      Param& p = *n.param;
      if (!p.grad.SameShape(p.value)) p.ZeroGrad();
      for (std::size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += n.grad[i];
    }
    if (n.backward) n.backward(*this, id);
  }
}

// --- Ops --------------------------------------------------------------------

Var MatMul(Tape& t, Var a, Var b) {
  const Matrix& A = t.value(a);
  const Matrix& B = t.value(b);
  if (A.cols() != B.rows()) {
    throw ValidationError("MatMul shape mismatch " + A.ShapeString() + " * " +
                          B.ShapeString());
  }
  Matrix C(A.rows(), B.cols());
  k::MatMul(A.span(), B.span(), C.span(), A.rows(), A.cols(), B.cols());
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  return t.Push(std::move(C), rg, [a, b](Tape& t, std::size_t self) {
    const Matrix& A = t.value(a);
    const Matrix& B = t.value(b);
    const std::size_t n = A.rows(), kk = A.cols(), m = B.cols();
    if (t.requires_grad(a)) {
      k::MatMulNT(t.grad(self).span(), B.span(), t.grad(a).span(), n, m, kk, true);
    }
    if (t.requires_grad(b)) {
      k::MatMulTN(A.span(), t.grad(self).span(), t.grad(b).span(), kk, n, m, true);
    }
  });
}

Var MatMulNT(Tape& t, Var a, Var b) {
  const Matrix& A = t.value(a);
  const Matrix& B = t.value(b);
  if (A.cols() != B.cols()) {
    throw ValidationError("MatMulNT shape mismatch " + A.ShapeString() + " * (" +
                          B.ShapeString() + ")^T");
  }
  Matrix C(A.rows(), B.rows());
  k::MatMulNT(A.span(), B.span(), C.span(), A.rows(), A.cols(), B.rows());
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  return t.Push(std::move(C), rg, [a, b](Tape& t, std::size_t self) {
    const Matrix& A = t.value(a);
    const Matrix& B = t.value(b);
    const std::size_t n = A.rows(), kk = A.cols(), m = B.rows();
    if (t.requires_grad(a)) {
      k::MatMul(t.grad(self).span(), B.span(), t.grad(a).span(), n, m, kk, true);
    }
    if (t.requires_grad(b)) {
      k::MatMulTN(t.grad(self).span(), A.span(), t.grad(b).span(), m, n, kk, true);
    }
  });
}

Var Add(Tape& t, Var a, Var b) {
  const Matrix& A = t.value(a);
  const Matrix& B = t.value(b);
  if (!A.SameShape(B)) {
    throw ValidationError("Add shape mismatch " + A.ShapeString() + " + " +
                          B.ShapeString());
  }
  Matrix C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C[i] += B[i];
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  return t.Push(std::move(C), rg, [a, b](Tape& t, std::size_t self) {
    for (Var in : {a, b}) {
      if (!t.requires_grad(in)) continue;
      Matrix& g = t.grad(in);
      const Matrix& up = t.grad(self);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += up[i];
    }
  });
}

Var AddRowVector(Tape& t, Var a, Var row) {
  const Matrix& A = t.value(a);
  const Matrix& R = t.value(row);
  CheckShape(R, 1, A.cols(), "AddRowVector bias");
  Matrix C = A;
  for (std::size_t r = 0; r < C.rows(); ++r) {
    for (std::size_t c = 0; c < C.cols(); ++c) C(r, c) += R[c];
  }
  const bool rg = t.requires_grad(a) || t.requires_grad(row);
  return t.Push(std::move(C), rg, [a, row](Tape& t, std::size_t self) {
    const Matrix& up = t.grad(self);
    if (t.requires_grad(a)) {
      Matrix& g = t.grad(a);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += up[i];
    }
    if (t.requires_grad(row)) {
      Matrix& g = t.grad(row);
      for (std::size_t r = 0; r < up.rows(); ++r) {
        for (std::size_t c = 0; c < up.cols(); ++c) g[c] += up(r, c);
      }
    }
  });
}

Var ScaleShift(Tape& t, Var a, double scale, double shift) {
  Matrix C = t.value(a);
  for (std::size_t i = 0; i < C.size(); ++i) C[i] = C[i] * scale + shift;
  return t.Push(std::move(C), t.requires_grad(a), [a, scale](Tape& t, std::size_t self) {
    Matrix& g = t.grad(a);
    const Matrix& up = t.grad(self);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += scale * up[i];
  });
}

Var Scale(Tape& t, Var a, double s) { return ScaleShift(t, a, s, 0.0); }

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluA = 0.044715;
}  // namespace

Var Gelu(Tape& t, Var a) {
  const Matrix& X = t.value(a);
  Matrix Y(X.rows(), X.cols());
  for (std::size_t i = 0; i < X.size(); ++i) {
    const double x = X[i];
    Y[i] = 0.5 * x * (1.0 + std::tanh(kGeluC * (x + kGeluA * x * x * x)));
  }
  return t.Push(std::move(Y), t.requires_grad(a), [a](Tape& t, std::size_t self) {
    const Matrix& X = t.value(a);
    const Matrix& up = t.grad(self);
    Matrix& g = t.grad(a);
    for (std::size_t i = 0; i < X.size(); ++i) {
      const double x = X[i];
      const double th = std::tanh(kGeluC * (x + kGeluA * x * x * x));
      const double d = 0.5 * (1.0 + th) +
                       0.5 * x * (1.0 - th * th) * kGeluC * (1.0 + 3.0 * kGeluA * x * x);
      g[i] += d * up[i];
    }
  });
}

Var LayerNorm(Tape& t, Var x, Var gamma, Var beta, double eps) {
  const Matrix& X = t.value(x);
  const std::size_t n = X.rows(), d = X.cols();
  CheckShape(t.value(gamma), 1, d, "LayerNorm gamma");
  CheckShape(t.value(beta), 1, d, "LayerNorm beta");
  const Matrix& G = t.value(gamma);
  const Matrix& B = t.value(beta);
  auto xhat = std::make_shared<Matrix>(n, d);
  auto rstd = std::make_shared<std::vector<double>>(n);
  Matrix Y(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    double mean = 0.0;
    for (std::size_t c = 0; c < d; ++c) mean += X(r, c);
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t c = 0; c < d; ++c) var += (X(r, c) - mean) * (X(r, c) - mean);
    var /= static_cast<double>(d);
    const double rs = 1.0 / std::sqrt(var + eps);
    (*rstd)[r] = rs;
    for (std::size_t c = 0; c < d; ++c) {
      const double h = (X(r, c) - mean) * rs;
      (*xhat)(r, c) = h;
      Y(r, c) = h * G[c] + B[c];
    }
  }
  const bool rg = t.requires_grad(x) || t.requires_grad(gamma) || t.requires_grad(beta);
  return t.Push(std::move(Y), rg, [x, gamma, beta, xhat, rstd](Tape& t, std::size_t self) {
    const Matrix& up = t.grad(self);
    const Matrix& G = t.value(gamma);
    const std::size_t n = up.rows(), d = up.cols();
    if (t.requires_grad(gamma) || t.requires_grad(beta)) {
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
          if (t.requires_grad(gamma)) t.grad(gamma)[c] += up(r, c) * (*xhat)(r, c);
          if (t.requires_grad(beta)) t.grad(beta)[c] += up(r, c);
        }
      }
    }
    if (!t.requires_grad(x)) return;
    Matrix& gx = t.grad(x);
    for (std::size_t r = 0; r < n; ++r) {
      double mean_dh = 0.0, mean_dh_h = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double dh = up(r, c) * G[c];
        mean_dh += dh;
        mean_dh_h += dh * (*xhat)(r, c);
      }
      mean_dh /= static_cast<double>(d);
      mean_dh_h /= static_cast<double>(d);
      for (std::size_t c = 0; c < d; ++c) {
        const double dh = up(r, c) * G[c];
        gx(r, c) += (*rstd)[r] * (dh - mean_dh - (*xhat)(r, c) * mean_dh_h);
      }
    }
  });
}

Var SliceRows(Tape& t, Var a, std::size_t begin, std::size_t count) {
  const Matrix& A = t.value(a);
  if (begin + count > A.rows()) throw ValidationError("SliceRows out of range");
  Matrix C(count, A.cols());
  std::copy_n(A.data() + begin * A.cols(), count * A.cols(), C.data());
  return t.Push(std::move(C), t.requires_grad(a), [a, begin](Tape& t, std::size_t self) {
    const Matrix& up = t.grad(self);
    Matrix& g = t.grad(a);
    double* dst = g.data() + begin * g.cols();
    for (std::size_t i = 0; i < up.size(); ++i) dst[i] += up[i];
  });
}

Var ConcatRows(Tape& t, std::span<const Var> parts) {
  if (parts.empty()) throw ValidationError("ConcatRows of nothing");
  const std::size_t cols = t.value(parts[0]).cols();
  std::size_t rows = 0;
  bool rg = false;
  for (Var p : parts) {
    if (t.value(p).cols() != cols) throw ValidationError("ConcatRows column mismatch");
    rows += t.value(p).rows();
    rg = rg || t.requires_grad(p);
  }
  Matrix C(rows, cols);
  std::size_t off = 0;
  for (Var p : parts) {
    const Matrix& P = t.value(p);
    std::copy_n(P.data(), P.size(), C.data() + off);
    off += P.size();
  }
  std::vector<Var> ins(parts.begin(), parts.end());
  return t.Push(std::move(C), rg, [ins](Tape& t, std::size_t self) {
    std::size_t off = 0;
    for (Var p : ins) {
      const std::size_t n = t.value(p).size();
      if (t.requires_grad(p)) {
        Matrix& g = t.grad(p);
        const double* src = t.grad(self).data() + off;
        for (std::size_t i = 0; i < n; ++i) g[i] += src[i];
      }
      off += n;
    }
  });
}

Var GroupMeanRows(Tape& t, Var a, std::size_t group) {
  const Matrix& A = t.value(a);
  if (group == 0 || A.rows() % group != 0) {
    throw ValidationError("GroupMeanRows: " + std::to_string(A.rows()) +
                          " rows not divisible by " + std::to_string(group));
  }
  const std::size_t out_rows = A.rows() / group, d = A.cols();
  Matrix C(out_rows, d);
  const double inv = 1.0 / static_cast<double>(group);
  for (std::size_t r = 0; r < A.rows(); ++r) {
    for (std::size_t c = 0; c < d; ++c) C(r / group, c) += A(r, c) * inv;
  }
  return t.Push(std::move(C), t.requires_grad(a), [a, group, inv](Tape& t, std::size_t self) {
    const Matrix& up = t.grad(self);
    Matrix& g = t.grad(a);
    for (std::size_t r = 0; r < g.rows(); ++r) {
      for (std::size_t c = 0; c < g.cols(); ++c) g(r, c) += up(r / group, c) * inv;
    }
  });
}

Var GatherRows(Tape& t, Var table, std::vector<int> ids) {
  const Matrix& T = t.value(table);
  Matrix C(ids.size(), T.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= T.rows()) {
      throw ValidationError("token id " + std::to_string(ids[i]) + " out of range");
    }
    std::copy_n(T.data() + ids[i] * T.cols(), T.cols(), C.data() + i * T.cols());
  }
  return t.Push(std::move(C), t.requires_grad(table),
                [table, ids = std::move(ids)](Tape& t, std::size_t self) {
                  const Matrix& up = t.grad(self);
                  Matrix& g = t.grad(table);
                  for (std::size_t i = 0; i < ids.size(); ++i) {
                    for (std::size_t c = 0; c < up.cols(); ++c) g(ids[i], c) += up(i, c);
                  }
                });
}

Var Attention(Tape& t, Var q, Var kv_k, Var kv_v, std::size_t heads, AttentionMask mask) {
  const Matrix& Q = t.value(q);
  const Matrix& K = t.value(kv_k);
  const Matrix& V = t.value(kv_v);
  const std::size_t nq = Q.rows(), nk = K.rows(), d = Q.cols();
  if (K.cols() != d || V.cols() != d || V.rows() != nk) {
    throw ValidationError("Attention shape mismatch q " + Q.ShapeString() + " k " +
                          K.ShapeString() + " v " + V.ShapeString());
  }
  if (heads == 0 || d % heads != 0) throw ValidationError("heads must divide model dim");
  const std::size_t dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  // probs[h] is nq x nk.
  auto probs = std::make_shared<std::vector<Matrix>>(heads, Matrix(nq, nk));
  Matrix O(nq, d);
  for (std::size_t h = 0; h < heads; ++h) {
    Matrix& P = (*probs)[h];
    const std::size_t c0 = h * dh;
    for (std::size_t i = 0; i < nq; ++i) {
      double mx = -INFINITY;
      for (std::size_t j = 0; j < nk; ++j) {
        if (!mask.Allowed(i, j)) continue;
        double s = 0.0;
        for (std::size_t c = 0; c < dh; ++c) s += Q(i, c0 + c) * K(j, c0 + c);
        P(i, j) = s * scale;
        mx = std::max(mx, P(i, j));
      }
      double z = 0.0;
      for (std::size_t j = 0; j < nk; ++j) {
        if (!mask.Allowed(i, j)) {
          P(i, j) = 0.0;
          continue;
        }
        P(i, j) = std::exp(P(i, j) - mx);
        z += P(i, j);
      }
      for (std::size_t j = 0; j < nk; ++j) P(i, j) /= z;
      for (std::size_t j = 0; j < nk; ++j) {
        const double p = P(i, j);
        if (p == 0.0) continue;
        for (std::size_t c = 0; c < dh; ++c) O(i, c0 + c) += p * V(j, c0 + c);
      }
    }
  }
  const bool rg = t.requires_grad(q) || t.requires_grad(kv_k) || t.requires_grad(kv_v);
  return t.Push(std::move(O), rg,
                [q, kv_k, kv_v, heads, probs, scale](Tape& t, std::size_t self) {
                  const Matrix& Q = t.value(q);
                  const Matrix& K = t.value(kv_k);
                  const Matrix& V = t.value(kv_v);
                  const Matrix& up = t.grad(self);
                  const std::size_t nq = Q.rows(), nk = K.rows(), d = Q.cols();
                  const std::size_t dh = d / heads;
                  const bool gq = t.requires_grad(q), gk = t.requires_grad(kv_k),
                             gv = t.requires_grad(kv_v);
                  std::vector<double> dp(nk);
                  for (std::size_t h = 0; h < heads; ++h) {
                    const Matrix& P = (*probs)[h];
                    const std::size_t c0 = h * dh;
                    for (std::size_t i = 0; i < nq; ++i) {
                      double dot = 0.0;
                      for (std::size_t j = 0; j < nk; ++j) {
                        double s = 0.0;
                        if (P(i, j) != 0.0) {
                          for (std::size_t c = 0; c < dh; ++c) s += up(i, c0 + c) * V(j, c0 + c);
                        }
                        dp[j] = s;
                        dot += s * P(i, j);
                      }
                      for (std::size_t j = 0; j < nk; ++j) {
                        const double p = P(i, j);
                        if (p == 0.0) continue;
                        if (gv) {
                          Matrix& g = t.grad(kv_v);
                          for (std::size_t c = 0; c < dh; ++c) g(j, c0 + c) += p * up(i, c0 + c);
                        }
                        const double ds = p * (dp[j] - dot) * scale;
                        if (gq) {
                          Matrix& g = t.grad(q);
                          for (std::size_t c = 0; c < dh; ++c) g(i, c0 + c) += ds * K(j, c0 + c);
                        }
                        if (gk) {
                          Matrix& g = t.grad(kv_k);
                          for (std::size_t c = 0; c < dh; ++c) g(j, c0 + c) += ds * Q(i, c0 + c);
                        }
                      }
                    }
                  }
                });
}

namespace {

// Row-wise log-softmax.
std::vector<double> LogSoftmaxRow(std::span<const double> row) {
  const double mx = *std::max_element(row.begin(), row.end());
  double z = 0.0;
  for (double v : row) z += std::exp(v - mx);
  const double lz = mx + std::log(z);
  std::vector<double> out(row.size());
  for (std::size_t i = 0; i < row.size(); ++i) out[i] = row[i] - lz;
  return out;
}

}  // namespace

double LanguageLossValue(const Matrix& logits, std::span<const int> labels) {
  if (labels.size() != logits.rows()) {
    throw ValidationError("label count " + std::to_string(labels.size()) +
                          " does not match logit rows " + std::to_string(logits.rows()));
  }
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (labels[r] < 0) continue;
    if (static_cast<std::size_t>(labels[r]) >= logits.cols()) {
      throw ValidationError("label id out of vocabulary");
    }
    total -= LogSoftmaxRow(logits.row(r))[labels[r]];
    ++n;
  }
  if (n == 0) throw ValidationError("language loss over an empty label");
  return total / static_cast<double>(n);
}

Var LanguageLoss(Tape& t, Var logits, std::vector<int> labels) {
  const double loss = LanguageLossValue(t.value(logits), labels);
  const std::size_t n = static_cast<std::size_t>(
      std::count_if(labels.begin(), labels.end(), [](int l) { return l >= 0; }));
  return t.Push(Matrix(1, 1, loss), t.requires_grad(logits),
                [logits, labels = std::move(labels), n](Tape& t, std::size_t self) {
                  const double up = t.grad(self)[0] / static_cast<double>(n);
                  const Matrix& L = t.value(logits);
                  Matrix& g = t.grad(logits);
                  for (std::size_t r = 0; r < labels.size(); ++r) {
                    if (labels[r] < 0) continue;
                    const auto ls = LogSoftmaxRow(L.row(r));
                    for (std::size_t c = 0; c < ls.size(); ++c) {
                      g(r, c) += up * (std::exp(ls[c]) -
                                       (static_cast<int>(c) == labels[r] ? 1.0 : 0.0));
                    }
                  }
                });
}

double L1LossValue(std::span<const double> preds, std::span<const double> targets,
                   std::span<const char> mask) {
  if (preds.size() != targets.size() || preds.size() != mask.size()) {
    throw ValidationError("L1 loss length mismatch");
  }
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (!mask[i]) continue;
    total += std::abs(preds[i] - targets[i]);
    ++n;
  }
  return n ? total / static_cast<double>(n) : 0.0;
}

Var MaskedL1(Tape& t, Var preds, std::vector<double> targets, std::vector<char> mask) {
  const Matrix& P = t.value(preds);
  CheckShape(P, targets.size(), 1, "MaskedL1 predictions");
  const double loss = L1LossValue(P.span(), targets, mask);
  const std::size_t n = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
  return t.Push(Matrix(1, 1, loss), t.requires_grad(preds) && n > 0,
                [preds, targets = std::move(targets), mask = std::move(mask), n](
                    Tape& t, std::size_t self) {
                  const double up = t.grad(self)[0] / static_cast<double>(n);
                  const Matrix& P = t.value(preds);
                  Matrix& g = t.grad(preds);
                  for (std::size_t i = 0; i < targets.size(); ++i) {
                    if (!mask[i]) continue;
                    const double diff = P[i] - targets[i];
                    g[i] += up * (diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0));
                  }
                });
}

Var Sum(Tape& t, std::span<const Var> scalars) {
  double total = 0.0;
  bool rg = false;
  for (Var s : scalars) {
    CheckShape(t.value(s), 1, 1, "Sum operand");
    total += t.value(s)[0];
    rg = rg || t.requires_grad(s);
  }
  std::vector<Var> ins(scalars.begin(), scalars.end());
  return t.Push(Matrix(1, 1, total), rg, [ins](Tape& t, std::size_t self) {
    const double up = t.grad(self)[0];
    for (Var s : ins) {
      if (t.requires_grad(s)) t.grad(s)[0] += up;
    }
  });
}

}  // namespace finevq::nn
