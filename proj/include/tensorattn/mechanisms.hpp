#pragma once

// String-keyed registry of every attention variant, used by the transformer
// block, the benchmark harness and the demo.

#include <string>
#include <string_view>
#include <vector>

#include "tensorattn/baselines.hpp"
#include "tensorattn/tensor_attention.hpp"
#include "tensorattn/tensor_interaction.hpp"

namespace tensorattn {

struct MechanismInfo {
  std::string id;
  std::string description;
  /// Cost grows at most linearly in n for fixed d.
  bool linear_in_n;
  /// Output has d columns only when d_v = d.
  bool requires_dv_eq_d;
};

inline const std::vector<MechanismInfo>& mechanisms() {
  static const std::vector<MechanismInfo> table = {
      {"softmax", "softmax(Q K^T / sqrt d) V", false, false},
      {"linear-kernel", "phi(Q) (phi(K)^T V), phi(x) = [1; x/|x|]", true, false},
      {"tensor-naive", "materialized T_Q / tr(T_Q) times V", false, false},
      {"tensor-naive-k", "materialized T_K / tr(T_K) times V", false, false},
      {"tensor-linear", "Q (K^T K)(Q^T V) / tr, no n x n matrix", true, false},
      {"tensor-linear-k", "K (Q^T Q)(K^T V) / tr, no n x n matrix", true, false},
      {"tensor-diag", "diag(T_Q)^-1 T_Q V, factorized", true, false},
      {"tensor-row", "diag(T_Q 1)^-1 T_Q V, factorized", true, false},
      {"tensor-hadamard", "(A .* A^T) / tr times V", false, false},
      {"tensor-relu", "ReLU(T_Q) / tr(T_Q) times V", false, false},
      {"tensor-elem-exp", "exp(T_Q / tr) entrywise times V", false, false},
      {"tensor-expm", "e^{T_Q / tr} V", false, false},
      {"tensor-masked", "tril(T_Q) / tr(T_Q) times V", false, false},
      {"tensor-residual", "(T_Q + tr(T_Q) I) V, unnormalized", true, false},
      {"tensor-interaction", "V (T / tr T)^T with T = (Q^T K)(Q^T K)^T", true, true},
      {"tensor-interaction-k", "V (T / tr T)^T with T = (Q^T K)^T (Q^T K)", true, true},
  };
  return table;
}

inline bool is_known_mechanism(std::string_view id) {
  for (const auto& m : mechanisms()) {
    if (m.id == id) return true;
  }
  return false;
}

inline const MechanismInfo& mechanism_info(std::string_view id) {
  for (const auto& m : mechanisms()) {
    if (m.id == id) return m;
  }
  throw Error(ErrorCode::UnknownVariant, "unknown mechanism '" + std::string(id) + "'");
}

inline MechanismFn make_mechanism(std::string_view id) {
  mechanism_info(id);
  auto with = [](Side side, Normalization norm, bool hadamard = false) {
    TensorOpConfig cfg;
    cfg.side = side;
    cfg.normalization = norm;
    cfg.hadamard = hadamard;
    return cfg;
  };
  if (id == "softmax") return [](const RealAttnInputs& in) { return softmax_attention(in); };
  if (id == "linear-kernel") return [](const RealAttnInputs& in) { return linear_kernel_attention(in); };
  if (id == "tensor-naive") {
    return [](const RealAttnInputs& in) { return tensor_attention_naive(in); };
  }
  if (id == "tensor-naive-k") {
    return [cfg = with(Side::Key, Normalization::Trace)](const RealAttnInputs& in) {
      return tensor_attention_naive(in, cfg);
    };
  }
  if (id == "tensor-linear") {
    return [](const RealAttnInputs& in) { return tensor_attention_linear(in, Side::Query); };
  }
  if (id == "tensor-linear-k") {
    return [](const RealAttnInputs& in) { return tensor_attention_linear(in, Side::Key); };
  }
  if (id == "tensor-diag") {
    return [cfg = with(Side::Query, Normalization::Diag)](const RealAttnInputs& in) {
      return tensor_attention_linear(in, cfg);
    };
  }
  if (id == "tensor-row") {
    return [cfg = with(Side::Query, Normalization::Row)](const RealAttnInputs& in) {
      return tensor_attention_linear(in, cfg);
    };
  }
  if (id == "tensor-hadamard") {
    return [cfg = with(Side::Query, Normalization::Trace, true)](const RealAttnInputs& in) {
      return tensor_attention_naive(in, cfg);
    };
  }
  if (id == "tensor-relu") {
    return [](const RealAttnInputs& in) { return tensor_attention_relu(in); };
  }
  if (id == "tensor-elem-exp") {
    return [](const RealAttnInputs& in) { return tensor_attention_elem_exp(in); };
  }
  if (id == "tensor-expm") {
    return [](const RealAttnInputs& in) { return tensor_attention_expm(in); };
  }
  if (id == "tensor-masked") {
    return [](const RealAttnInputs& in) { return tensor_attention_masked(in); };
  }
  if (id == "tensor-residual") {
    return [](const RealAttnInputs& in) {
      return tensor_attention_residual(in, TensorOpConfig{}, ResidualSpec{1.0});
    };
  }
  if (id == "tensor-interaction") {
    return [](const RealAttnInputs& in) { return tensor_interaction(in); };
  }
  InteractionConfig icfg;
  icfg.side = Side::Key;
  return [icfg](const RealAttnInputs& in) { return tensor_interaction(in, icfg); };
}

}  // namespace tensorattn
