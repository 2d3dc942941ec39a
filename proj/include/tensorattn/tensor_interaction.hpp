#pragma once

// TensorInteraction: the d x d channel-space operator built from B = Q^H K,
// applied to V^T. Its size does not depend on the sequence length.

#include <optional>
#include <string>

#include "tensorattn/attention_inputs.hpp"
#include "tensorattn/dense.hpp"
#include "tensorattn/matrix_functions.hpp"
#include "tensorattn/tensor_attention.hpp"

namespace tensorattn {

enum class Orientation {
  AsWritten_dxn,      // (1/tr) T V^T, d x n
  TransposedBack_nxd  // its transpose, n x d like every other mechanism
};

struct InteractionConfig {
  Side side = Side::Query;
  bool hadamard = false;
  Orientation orientation = Orientation::TransposedBack_nxd;
  /// Defaults to 1e-12 * d.
  std::optional<double> trace_epsilon;

  double epsilon_for(std::size_t d) const {
    const double eps = trace_epsilon.value_or(1e-12 * static_cast<double>(d));
    if (!(eps > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "InteractionConfig: trace_epsilon must be > 0");
    }
    return eps;
  }
};

/// QSide: B B^H, KSide: B^H B, Hadamard: B[i,j] conj(B[j,i]); B = Q^H K.
template <Scalar T>
Matrix<T> build_interaction_operator(const Matrix<T>& q, const Matrix<T>& k,
                                     const InteractionConfig& cfg = {}) {
  detail::require_qk(q, k, "build_interaction_operator");
  const Matrix<T> b = gemm(q, k, Op::ConjTrans, Op::None);
  if (!cfg.hadamard) return herk(b, cfg.side == Side::Query ? Op::None : Op::ConjTrans);
  const std::size_t d = b.rows();
  Matrix<T> t(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    t(i, i) = T{abs2(b(i, i))};
    for (std::size_t j = i + 1; j < d; ++j) {
      const T v = b(i, j) * conj(b(j, i));
      t(i, j) = v;
      t(j, i) = conj(v);
    }
  }
  return t;
}

namespace detail {

template <Scalar T>
Matrix<T> interaction_normalized(const AttnInputs<T>& in, const InteractionConfig& cfg,
                                 std::string_view where) {
  if (in.dv() != in.d()) {
    throw Error(ErrorCode::DvMismatch, std::string(where) + ": V is " + shape_of(in.v()) +
                                           " but the operator is " + std::to_string(in.d()) + "x" +
                                           std::to_string(in.d()));
  }
  const Matrix<T> t = build_interaction_operator(in.q(), in.k(), cfg);
  const double tr = checked_trace(t, cfg.epsilon_for(in.d()), where);
  return T{1.0 / tr} * t;
}

template <Scalar T>
Matrix<T> orient(const Matrix<T>& t_hat, const Matrix<T>& v, Orientation o) {
  // (t_hat V^T)^T = V t_hat^T
  if (o == Orientation::AsWritten_dxn) return gemm(t_hat, transpose(v));
  return gemm(v, transpose(t_hat));
}

}  // namespace detail

/// (1/tr T) T V^T, returned d x n or transposed back to n x d. Requires d_v = d.
template <Scalar T>
Matrix<T> tensor_interaction(const AttnInputs<T>& in, const InteractionConfig& cfg = {}) {
  return detail::orient(detail::interaction_normalized(in, cfg, "tensor_interaction"), in.v(),
                        cfg.orientation);
}

/// e^{T / tr T} applied to V^T, in the same orientation as tensor_interaction.
template <Scalar T>
Matrix<T> tensor_interaction_expm(const AttnInputs<T>& in, const InteractionConfig& cfg = {},
                                  const ExpmSpec& spec = {}) {
  const Matrix<T> t_hat = detail::interaction_normalized(in, cfg, "tensor_interaction_expm");
  return detail::orient(expm(t_hat, spec), in.v(), cfg.orientation);
}

}  // namespace tensorattn
