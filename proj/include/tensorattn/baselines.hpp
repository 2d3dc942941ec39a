#pragma once

// Reference mechanisms: scaled dot-product softmax attention, kernelized
// linear attention and the multi-head wrapper.

#include <cmath>
#include <future>
#include <span>
#include <string>
#include <vector>

#include "tensorattn/attention_inputs.hpp"
#include "tensorattn/dense.hpp"
#include "tensorattn/random.hpp"

namespace tensorattn {

inline constexpr std::size_t kDefaultModelWidth = 512;
inline constexpr std::size_t kDefaultHeads = 8;

/// Row-stochastic weights softmax(Q K^T / sqrt(d)), with the row maximum
/// subtracted before exponentiation.
inline RealMatrix softmax_weights(const RealAttnInputs& in) {
  RealMatrix logits = gemm(in.q(), in.k(), Op::None, Op::ConjTrans);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(in.d()));
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto row = logits.row(i);
    double mx = -std::numeric_limits<double>::infinity();
    for (double& x : row) {
      x *= inv_sqrt_d;
      mx = std::max(mx, x);
    }
    double total = 0.0;
    for (double& x : row) {
      x = std::exp(x - mx);
      total += x;
    }
    for (double& x : row) x /= total;
  }
  return logits;
}

inline RealMatrix softmax_attention(const RealAttnInputs& in) {
  return gemm(softmax_weights(in), in.v());
}

struct KernelSpec {
  /// Guard for zero-norm rows: x / max(||x||, epsilon).
  double epsilon = 1e-12;

  void validate() const {
    if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "KernelSpec: epsilon must be > 0");
  }
};

/// phi(x) = [1; x / max(||x||_2, eps)], so phi(q)^T phi(k) = 1 + cos(q, k).
inline std::vector<double> kernel_feature_map(std::span<const double> x, const KernelSpec& spec = {}) {
  spec.validate();
  double norm2 = 0.0;
  for (double v : x) norm2 += v * v;
  const double scale = 1.0 / std::max(std::sqrt(norm2), spec.epsilon);
  std::vector<double> out;
  out.reserve(x.size() + 1);
  out.push_back(1.0);
  for (double v : x) out.push_back(v * scale);
  return out;
}

/// Applies kernel_feature_map to every row: n x (d+1).
inline RealMatrix feature_map_rows(const RealMatrix& m, const KernelSpec& spec = {}) {
  RealMatrix out(m.rows(), m.cols() + 1);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto phi = kernel_feature_map(m.row(i), spec);
    std::copy(phi.begin(), phi.end(), out.row(i).begin());
  }
  return out;
}

/// phi(Q) (phi(K)^T V) with per-row denominators phi(Q) (phi(K)^T 1); the
/// n x n kernel matrix is never formed.
inline RealMatrix linear_kernel_attention(const RealAttnInputs& in, const KernelSpec& spec = {}) {
  spec.validate();
  const RealMatrix phi_q = feature_map_rows(in.q(), spec);
  const RealMatrix phi_k = feature_map_rows(in.k(), spec);
  const RealMatrix kv = gemm(phi_k, in.v(), Op::ConjTrans, Op::None);

  std::vector<double> ksum(phi_k.cols(), 0.0);
  for (std::size_t j = 0; j < phi_k.rows(); ++j) {
    for (std::size_t c = 0; c < phi_k.cols(); ++c) ksum[c] += phi_k(j, c);
  }

  RealMatrix out = gemm(phi_q, kv);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    double den = 0.0;
    for (std::size_t c = 0; c < phi_q.cols(); ++c) den += phi_q(i, c) * ksum[c];
    if (!(den >= spec.epsilon)) {
      throw Error(ErrorCode::DegenerateDenominator,
                  "linear_kernel_attention: row " + std::to_string(i) + " denominator " +
                      std::to_string(den) + " below epsilon");
    }
    for (double& x : out.row(i)) x /= den;
  }
  return out;
}

/// Per-head projections W_Q[i], W_K[i], W_V[i] (d x d/h), output projection
/// W_O (d x d) and the attention operation each head runs.
struct MultiHeadSpec {
  std::size_t heads = 1;
  std::vector<RealMatrix> w_q;
  std::vector<RealMatrix> w_k;
  std::vector<RealMatrix> w_v;
  RealMatrix w_o;
  MechanismFn mechanism;
  /// Evaluate heads concurrently; concatenation order is unaffected.
  bool parallel_heads = false;

  std::size_t head_width(std::size_t d) const { return heads == 0 ? 0 : d / heads; }

  void validate(std::size_t d) const {
    if (heads == 0 || d % heads != 0) {
      throw Error(ErrorCode::DimensionMismatch, "MultiHeadSpec: d=" + std::to_string(d) +
                                                    " not divisible by h=" + std::to_string(heads));
    }
    if (w_q.size() != heads || w_k.size() != heads || w_v.size() != heads) {
      throw Error(ErrorCode::DimensionMismatch, "MultiHeadSpec: expected one projection per head");
    }
    const std::size_t hw = d / heads;
    for (std::size_t i = 0; i < heads; ++i) {
      for (const RealMatrix* w : {&w_q[i], &w_k[i], &w_v[i]}) {
        if (w->rows() != d || w->cols() != hw) {
          throw Error(ErrorCode::DimensionMismatch, "MultiHeadSpec: head " + std::to_string(i) +
                                                        " projection is " + shape_of(*w) +
                                                        ", expected " + std::to_string(d) + "x" +
                                                        std::to_string(hw));
        }
      }
    }
    if (w_o.rows() != d || w_o.cols() != d) {
      throw Error(ErrorCode::DimensionMismatch, "MultiHeadSpec: W_O is " + shape_of(w_o));
    }
    if (!mechanism) throw Error(ErrorCode::InvalidArgument, "MultiHeadSpec: no mechanism");
  }

  /// h = 1 with identity projections.
  static MultiHeadSpec identity(std::size_t d, MechanismFn mech) {
    MultiHeadSpec spec;
    spec.heads = 1;
    spec.w_q = {RealMatrix::identity(d)};
    spec.w_k = {RealMatrix::identity(d)};
    spec.w_v = {RealMatrix::identity(d)};
    spec.w_o = RealMatrix::identity(d);
    spec.mechanism = std::move(mech);
    return spec;
  }

  /// Uniform [-1/sqrt(d), 1/sqrt(d)] projections.
  static MultiHeadSpec random(std::size_t d, std::size_t h, Rng& rng, MechanismFn mech) {
    MultiHeadSpec spec;
    spec.heads = h;
    spec.mechanism = std::move(mech);
    if (h == 0 || d % h != 0) {
      spec.validate(d);
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(d));
    for (std::size_t i = 0; i < h; ++i) {
      spec.w_q.push_back(random_matrix(rng, d, d / h, -bound, bound));
      spec.w_k.push_back(random_matrix(rng, d, d / h, -bound, bound));
      spec.w_v.push_back(random_matrix(rng, d, d / h, -bound, bound));
    }
    spec.w_o = random_matrix(rng, d, d, -bound, bound);
    return spec;
  }
};

/// Concat(head_1, ..., head_h) W_O with head_i = mechanism(Q W_Q[i], K W_K[i], V W_V[i]).
inline RealMatrix multi_head(const RealAttnInputs& in, const MultiHeadSpec& spec) {
  const std::size_t d = in.d();
  spec.validate(d);
  if (in.dv() != d) {
    throw Error(ErrorCode::DimensionMismatch,
                "multi_head: V is " + shape_of(in.v()) + ", expected width " + std::to_string(d));
  }
  const std::size_t hw = d / spec.heads;

  auto run_head = [&](std::size_t h) {
    RealAttnInputs projected(gemm(in.q(), spec.w_q[h]), gemm(in.k(), spec.w_k[h]),
                             gemm(in.v(), spec.w_v[h]));
    RealMatrix out = spec.mechanism(projected);
    if (out.rows() != in.n() || out.cols() != hw) {
      throw Error(ErrorCode::DimensionMismatch,
                  "multi_head: head " + std::to_string(h) + " returned " + shape_of(out));
    }
    return out;
  };

  std::vector<RealMatrix> heads(spec.heads);
  if (spec.parallel_heads && spec.heads > 1) {
    std::vector<std::future<RealMatrix>> pending;
    pending.reserve(spec.heads);
    for (std::size_t h = 0; h < spec.heads; ++h) {
      pending.push_back(std::async(std::launch::async, run_head, h));
    }
    for (std::size_t h = 0; h < spec.heads; ++h) heads[h] = pending[h].get();
  } else {
    for (std::size_t h = 0; h < spec.heads; ++h) heads[h] = run_head(h);
  }

  RealMatrix concat(in.n(), d);
  for (std::size_t h = 0; h < spec.heads; ++h) {
    for (std::size_t i = 0; i < in.n(); ++i) {
      std::copy(heads[h].row(i).begin(), heads[h].row(i).end(), concat.row(i).begin() + h * hw);
    }
  }
  return gemm(concat, spec.w_o);
}

}  // namespace tensorattn
