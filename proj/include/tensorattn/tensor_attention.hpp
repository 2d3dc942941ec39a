#pragma once

// TensorAttention: the n x n PSD operator T built from A = Q K^H, its
// trace / diagonal / row normalizations, the O(n) factorized evaluation and
// the ReLU, element-exp, matrix-exp, causal and residual variants.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tensorattn/attention_inputs.hpp"
#include "tensorattn/dense.hpp"
#include "tensorattn/matrix_functions.hpp"

namespace tensorattn {

/// QSide: T = A A^H = Q (K^H K) Q^H.  KSide: T = A^H A = K (Q^H Q) K^H.
enum class Side { Query, Key };

enum class Normalization { Trace, Diag, Row };

struct TensorOpConfig {
  Side side = Side::Query;
  /// Elementwise variant T[i,j] = A[i,j] * conj(A[j,i]) instead of the product.
  bool hadamard = false;
  Normalization normalization = Normalization::Trace;
  /// Smallest admissible normalizer; defaults to 1e-12 * n.
  std::optional<double> trace_epsilon;

  double epsilon_for(std::size_t n) const {
    const double eps = trace_epsilon.value_or(1e-12 * static_cast<double>(n));
    if (!(eps > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "TensorOpConfig: trace_epsilon must be > 0");
    }
    return eps;
  }
};

struct ResidualSpec {
  double lambda = 0.0;

  void validate() const {
    if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidArgument, "ResidualSpec: lambda must be >= 0");
  }
};

template <Scalar T>
struct AttentionIntermediates {
  Matrix<T> a;      // Q K^H, n x n
  Matrix<T> n;      // K^H K, d x d
  Matrix<T> g;      // Q^H Q, d x d
  Matrix<T> t_hat;  // T / tr(T), n x n
};

namespace detail {

template <Scalar T>
void require_qk(const Matrix<T>& q, const Matrix<T>& k, std::string_view where) {
  if (q.rows() != k.rows() || q.cols() != k.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(where) + ": Q is " + shape_of(q) + " but K is " + shape_of(k));
  }
}

/// (outer, inner) so that T_side = outer (inner^H inner) outer^H.
template <Scalar T>
std::pair<const Matrix<T>&, const Matrix<T>&> side_factors(const Matrix<T>& q, const Matrix<T>& k,
                                                           Side side) {
  if (side == Side::Query) return {q, k};
  return {k, q};
}

template <Scalar T>
double checked_trace(const Matrix<T>& t, double eps, std::string_view where) {
  const double tr = real_part(trace(t));
  if (!(tr >= eps)) {
    throw Error(ErrorCode::DegenerateNormalizer,
                std::string(where) + ": trace " + std::to_string(tr) + " below epsilon " +
                    std::to_string(eps));
  }
  return tr;
}

template <Scalar T>
void require_real_scalars(std::string_view where) {
  if constexpr (is_complex_v<T>) {
    throw Error(ErrorCode::ComplexNotSupported, std::string(where) + " is undefined on complex inputs");
  }
}

/// Real tr(A A^H) = sum(N .* G^T) with N = inner^H inner, G = outer^H outer.
template <Scalar T>
double hadamard_trace(const Matrix<T>& n, const Matrix<T>& g) {
  T acc{};
  for (std::size_t i = 0; i < n.rows(); ++i) {
    for (std::size_t j = 0; j < n.cols(); ++j) acc += n(i, j) * g(j, i);
  }
  return real_part(acc);
}

}  // namespace detail

/// Materializes the n x n operator selected by cfg.side / cfg.hadamard.
/// Every flavor is Hermitian with a real non-negative diagonal.
template <Scalar T>
Matrix<T> build_tensor_operator(const Matrix<T>& q, const Matrix<T>& k, const TensorOpConfig& cfg) {
  detail::require_qk(q, k, "build_tensor_operator");
  const Matrix<T> a = gemm(q, k, Op::None, Op::ConjTrans);
  if (!cfg.hadamard) {
    return herk(a, cfg.side == Side::Query ? Op::None : Op::ConjTrans);
  }
  // A .* (A^H)^T and (A^H)^T .* A hold the same entries; the product is
  // written in the order each side states it.
  const std::size_t n = a.rows();
  Matrix<T> t(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    t(i, i) = T{abs2(a(i, i))};
    for (std::size_t j = i + 1; j < n; ++j) {
      const T v = cfg.side == Side::Query ? a(i, j) * conj(a(j, i)) : conj(a(j, i)) * a(i, j);
      t(i, j) = v;
      t(j, i) = conj(v);
    }
  }
  return t;
}

/// tr(T_Q) = tr(T_K) = sum((K^H K) .* (Q^H Q)^T), in O(n d^2).
template <Scalar T>
double tensor_trace(const Matrix<T>& q, const Matrix<T>& k) {
  detail::require_qk(q, k, "tensor_trace");
  return detail::hadamard_trace(herk(k, Op::ConjTrans), herk(q, Op::ConjTrans));
}

template <Scalar T>
AttentionIntermediates<T> attention_intermediates(const Matrix<T>& q, const Matrix<T>& k,
                                                  const TensorOpConfig& cfg) {
  detail::require_qk(q, k, "attention_intermediates");
  AttentionIntermediates<T> out;
  out.a = gemm(q, k, Op::None, Op::ConjTrans);
  out.n = herk(k, Op::ConjTrans);
  out.g = herk(q, Op::ConjTrans);
  Matrix<T> t = build_tensor_operator(q, k, cfg);
  const double tr = detail::checked_trace(t, cfg.epsilon_for(q.rows()), "attention_intermediates");
  out.t_hat = T{1.0 / tr} * t;
  return out;
}

/// Diagonal of T_side without forming any n x n matrix: with N = K^H K,
/// out[i] = sum_{k,l} Q[i,k] N[k,l] conj(Q[i,l]), evaluated as rowwise dots of
/// W = Q N against Q. O(n d^2).
template <Scalar T>
std::vector<double> diag_fast(const Matrix<T>& q, const Matrix<T>& k, Side side = Side::Query) {
  detail::require_qk(q, k, "diag_fast");
  const auto [outer, inner] = detail::side_factors(q, k, side);
  const Matrix<T> n = herk(inner, Op::ConjTrans);
  const Matrix<T> w = gemm(outer, n);
  std::vector<double> out(outer.rows());
  for (std::size_t i = 0; i < outer.rows(); ++i) {
    T acc{};
    const auto wi = w.row(i);
    const auto oi = outer.row(i);
    for (std::size_t l = 0; l < wi.size(); ++l) acc += wi[l] * conj(oi[l]);
    // Quadratic form of a PSD matrix; rounding may dip a hair below zero.
    out[i] = std::max(0.0, real_part(acc));
  }
  return out;
}

/// Diagonal via the vanilla route: materialize A = Q K^H and T, then read
/// the diagonal. O(n^2 d + n^3).
template <Scalar T>
std::vector<double> diag_naive(const Matrix<T>& q, const Matrix<T>& k, Side side = Side::Query) {
  TensorOpConfig cfg;
  cfg.side = side;
  const Matrix<T> t = build_tensor_operator(q, k, cfg);
  std::vector<double> out(t.rows());
  for (std::size_t i = 0; i < t.rows(); ++i) out[i] = real_part(t(i, i));
  return out;
}

/// Applies the normalization to a materialized operator:
/// Trace -> T / tr(T), Diag -> diag(T)^-1 T, Row -> diag(T 1_n)^-1 T.
template <Scalar T>
Matrix<T> normalize_tensor_operator(const Matrix<T>& t, Normalization mode, double eps) {
  require_square(t, "normalize_tensor_operator");
  const std::size_t n = t.rows();
  switch (mode) {
    case Normalization::Trace: {
      const double tr = detail::checked_trace(t, eps, "trace normalization");
      return T{1.0 / tr} * t;
    }
    case Normalization::Diag: {
      std::vector<T> inv(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double di = real_part(t(i, i));
        if (!(di >= eps)) {
          throw Error(ErrorCode::DegenerateNormalizer,
                      "diag normalization: diagonal entry " + std::to_string(i) + " = " +
                          std::to_string(di) + " below epsilon " + std::to_string(eps));
        }
        inv[i] = T{1.0 / di};
      }
      return scale_rows<T>(t, inv);
    }
    case Normalization::Row: {
      std::vector<T> inv(n);
      for (std::size_t i = 0; i < n; ++i) {
        T s{};
        for (T x : t.row(i)) s += x;
        const bool ok = std::abs(s) >= eps;
        if (!ok) {
          throw Error(ErrorCode::DegenerateNormalizer,
                      "row normalization: row " + std::to_string(i) + " sum " +
                          std::to_string(real_part(s)) + " has magnitude below epsilon " + std::to_string(eps));
        }
        inv[i] = T{1} / s;
      }
      return scale_rows<T>(t, inv);
    }
  }
  return t;
}

/// Materializes T (O(n^2) memory), normalizes it and multiplies by V.
template <Scalar T>
Matrix<T> tensor_attention_naive(const AttnInputs<T>& in, const TensorOpConfig& cfg = {}) {
  const Matrix<T> t = build_tensor_operator(in.q(), in.k(), cfg);
  return gemm(normalize_tensor_operator(t, cfg.normalization, cfg.epsilon_for(in.n())), in.v());
}

/// Trace-normalized TensorAttention in O(n d^2 + n d d_v), never forming an
/// n x n matrix. QSide: Q (K^H K)(Q^H V) / sum((K^H K) .* (Q^H Q)^T);
/// KSide swaps the roles of Q and K.
template <Scalar T>
Matrix<T> tensor_attention_linear(const AttnInputs<T>& in, Side side = Side::Query,
                                  std::optional<double> trace_epsilon = std::nullopt) {
  TensorOpConfig cfg;
  cfg.side = side;
  cfg.trace_epsilon = trace_epsilon;
  const double eps = cfg.epsilon_for(in.n());
  const auto [outer, inner] = detail::side_factors(in.q(), in.k(), side);

  const Matrix<T> n = herk(inner, Op::ConjTrans);
  const Matrix<T> p = gemm(outer, in.v(), Op::ConjTrans, Op::None);
  Matrix<T> out = gemm(outer, gemm(n, p));

  const double tr = detail::hadamard_trace(n, herk(outer, Op::ConjTrans));
  if (!(tr >= eps)) {
    throw Error(ErrorCode::DegenerateNormalizer,
                "tensor_attention_linear: sum((K^T K) .* (Q^T Q)) = " + std::to_string(tr) +
                    " below epsilon " + std::to_string(eps));
  }
  const double inv = 1.0 / tr;
  for (T& x : out.data()) x *= inv;
  return out;
}

/// Factorized evaluation under any normalization mode. Diag uses diag_fast;
/// Row uses T 1_n = outer (N (outer^H 1_n)). Hadamard variants have no
/// factorized form and are rejected.
template <Scalar T>
Matrix<T> tensor_attention_linear(const AttnInputs<T>& in, const TensorOpConfig& cfg) {
  if (cfg.hadamard) {
    throw Error(ErrorCode::InvalidArgument,
                "tensor_attention_linear: Hadamard variants require the materialized path");
  }
  if (cfg.normalization == Normalization::Trace) {
    return tensor_attention_linear(in, cfg.side, cfg.trace_epsilon);
  }
  const double eps = cfg.epsilon_for(in.n());
  const auto [outer, inner] = detail::side_factors(in.q(), in.k(), cfg.side);
  const Matrix<T> n = herk(inner, Op::ConjTrans);
  const Matrix<T> tv = gemm(outer, gemm(n, gemm(outer, in.v(), Op::ConjTrans, Op::None)));

  std::vector<T> inv(in.n());
  if (cfg.normalization == Normalization::Diag) {
    const auto dg = diag_fast(in.q(), in.k(), cfg.side);
    for (std::size_t i = 0; i < dg.size(); ++i) {
      if (!(dg[i] >= eps)) {
        throw Error(ErrorCode::DegenerateNormalizer,
                    "diag normalization: diagonal entry " + std::to_string(i) + " = " +
                        std::to_string(dg[i]) + " below epsilon " + std::to_string(eps));
      }
      inv[i] = T{1.0 / dg[i]};
    }
  } else {
    const Matrix<T> ones(in.n(), 1, std::vector<T>(in.n(), T{1}));
    const Matrix<T> rs = gemm(outer, gemm(n, gemm(outer, ones, Op::ConjTrans, Op::None)));
    for (std::size_t i = 0; i < in.n(); ++i) {
      const T s = rs(i, 0);
      const bool ok = std::abs(s) >= eps;
      if (!ok) {
        throw Error(ErrorCode::DegenerateNormalizer,
                    "row normalization: row " + std::to_string(i) + " sum " +
                        std::to_string(real_part(s)) + " has magnitude below epsilon " + std::to_string(eps));
      }
      inv[i] = T{1} / s;
    }
  }
  return scale_rows<T>(tv, inv);
}

/// ReLU applied to the full materialized T before V. The diagonal is never
/// negative, so the trace normalizer is that of the unclamped T. Real only.
template <Scalar T>
Matrix<T> tensor_attention_relu(const AttnInputs<T>& in, const TensorOpConfig& cfg = {}) {
  detail::require_real_scalars<T>("tensor_attention_relu");
  Matrix<T> t = build_tensor_operator(in.q(), in.k(), cfg);
  if constexpr (!is_complex_v<T>) {
    for (double& x : t.data()) x = std::max(x, 0.0);
  }
  return gemm(normalize_tensor_operator(t, cfg.normalization, cfg.epsilon_for(in.n())), in.v());
}

/// exp applied entrywise to T / tr(T), then times V. No further
/// renormalization. Real only; cfg.normalization must be Trace.
template <Scalar T>
Matrix<T> tensor_attention_elem_exp(const AttnInputs<T>& in, const TensorOpConfig& cfg = {}) {
  detail::require_real_scalars<T>("tensor_attention_elem_exp");
  if (cfg.normalization != Normalization::Trace) {
    throw Error(ErrorCode::InvalidArgument, "tensor_attention_elem_exp: only trace normalization");
  }
  Matrix<T> t_hat = normalize_tensor_operator(build_tensor_operator(in.q(), in.k(), cfg),
                                              Normalization::Trace, cfg.epsilon_for(in.n()));
  if constexpr (!is_complex_v<T>) {
    for (double& x : t_hat.data()) x = std::exp(x);
  }
  return gemm(t_hat, in.v());
}

/// e^{T / tr(T)} V with the exponential from matrix-functions.
template <Scalar T>
Matrix<T> tensor_attention_expm(const AttnInputs<T>& in, const TensorOpConfig& cfg = {},
                                const ExpmSpec& spec = {}) {
  if (cfg.normalization != Normalization::Trace) {
    throw Error(ErrorCode::InvalidArgument, "tensor_attention_expm: only trace normalization");
  }
  const Matrix<T> t_hat = normalize_tensor_operator(build_tensor_operator(in.q(), in.k(), cfg),
                                                    Normalization::Trace, cfg.epsilon_for(in.n()));
  return gemm(expm(t_hat, spec), in.v());
}

/// Causal variant: tril(T) (diagonal kept) under the configured
/// normalization. tr(tril(T)) = tr(T), so Trace mode is unchanged.
template <Scalar T>
Matrix<T> tensor_attention_masked(const AttnInputs<T>& in, const TensorOpConfig& cfg = {}) {
  const Matrix<T> t = tril(build_tensor_operator(in.q(), in.k(), cfg));
  return gemm(normalize_tensor_operator(t, cfg.normalization, cfg.epsilon_for(in.n())), in.v());
}

/// Unnormalized (T + lambda tr(T) I) V. Product variants are evaluated as
/// outer (N (outer^H V)) + lambda tr(T) V without forming T; Hadamard
/// variants are materialized.
template <Scalar T>
Matrix<T> tensor_attention_residual(const AttnInputs<T>& in, const TensorOpConfig& cfg,
                                    const ResidualSpec& res) {
  res.validate();
  if (cfg.hadamard) {
    Matrix<T> t = build_tensor_operator(in.q(), in.k(), cfg);
    const T shift{res.lambda * real_part(trace(t))};
    for (std::size_t i = 0; i < t.rows(); ++i) t(i, i) += shift;
    return gemm(t, in.v());
  }
  const auto [outer, inner] = detail::side_factors(in.q(), in.k(), cfg.side);
  const Matrix<T> n = herk(inner, Op::ConjTrans);
  Matrix<T> out = gemm(outer, gemm(n, gemm(outer, in.v(), Op::ConjTrans, Op::None)));
  const double tr = detail::hadamard_trace(n, herk(outer, Op::ConjTrans));
  const double shift = res.lambda * tr;
  if (shift != 0.0) {
    auto o = out.data();
    const auto v = in.v().data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] += shift * v[i];
  }
  return out;
}

}  // namespace tensorattn
