#pragma once

// Forward-only pre-LN ViT encoder with a pluggable attention mechanism:
//   z_0  = [x_class; x_p^1 E; ...; x_p^N E] + E_pos
//   z'_l = MSA(LN(z_{l-1})) + z_{l-1}
//   z_l  = MLP(LN(z'_l)) + z'_l
//   y    = LN(z_L^0)

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "tensorattn/baselines.hpp"
#include "tensorattn/checksum.hpp"
#include "tensorattn/dense.hpp"
#include "tensorattn/mechanisms.hpp"
#include "tensorattn/random.hpp"

namespace tensorattn {

inline constexpr double kLayerNormEpsilon = 1e-5;

struct ViTConfig {
  std::size_t patch_dim = 16;
  std::size_t d = 8;
  /// 0 selects 4 d.
  std::size_t d_ff = 0;
  std::size_t n_patches = 4;
  std::size_t layers = 2;
  /// 0 selects 1 for tensor mechanisms and kDefaultHeads (when it divides d)
  /// otherwise.
  std::size_t heads = 0;
  std::string mechanism = "softmax";

  std::size_t ff_width() const { return d_ff == 0 ? 4 * d : d_ff; }

  std::size_t head_count() const {
    if (heads != 0) return heads;
    if (mechanism.rfind("tensor", 0) == 0) return 1;
    // A width-1 head collapses the cosine feature map to +-1, so row
    // denominators hit zero; keep linear-kernel heads at least 2 wide.
    const std::size_t min_width = mechanism == "linear-kernel" ? 2 : 1;
    for (std::size_t h = kDefaultHeads; h > 1; h /= 2) {
      if (d % h == 0 && d / h >= min_width) return h;
    }
    return 1;
  }

  void validate() const {
    if (patch_dim == 0 || d == 0 || n_patches == 0) {
      throw Error(ErrorCode::InvalidArgument, "ViTConfig: patch_dim, d and n_patches must be >= 1");
    }
    if (d % head_count() != 0) {
      throw Error(ErrorCode::DimensionMismatch, "ViTConfig: heads must divide d");
    }
    mechanism_info(mechanism);
  }
};

struct ViTLayer {
  std::vector<double> ln1_scale, ln1_shift;
  std::vector<double> ln2_scale, ln2_shift;
  std::vector<RealMatrix> w_q, w_k, w_v;  // one d x d/h per head
  RealMatrix w_o;                         // d x d
  RealMatrix w1;                          // d x d_ff
  std::vector<double> b1;
  RealMatrix w2;                          // d_ff x d
  std::vector<double> b2;
};

struct ViTParams {
  ViTConfig config;
  RealMatrix e;                 // patch_dim x d
  RealMatrix e_pos;             // (N+1) x d
  std::vector<double> x_class;  // d
  std::vector<ViTLayer> layers;
  std::vector<double> ln_final_scale, ln_final_shift;
  MechanismFn mechanism;
};

/// Deterministic initialization: every weight and bias uniform in
/// [-1/sqrt(d), 1/sqrt(d)], LayerNorm scale 1 and shift 0. Identical seeds
/// give bitwise-identical parameters.
inline ViTParams vit_init(const ViTConfig& config, std::uint64_t seed) {
  config.validate();
  ViTParams p;
  p.config = config;
  p.mechanism = make_mechanism(config.mechanism);
  Rng rng(mix_seed(seed));
  const std::size_t d = config.d;
  const std::size_t h = config.head_count();
  const std::size_t ff = config.ff_width();
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));
  auto mat = [&](std::size_t r, std::size_t c) { return random_matrix(rng, r, c, -bound, bound); };
  auto vec = [&](std::size_t len) {
    std::vector<double> out(len);
    for (double& x : out) x = rng.uniform(-bound, bound);
    return out;
  };

  p.e = mat(config.patch_dim, d);
  p.e_pos = mat(config.n_patches + 1, d);
  p.x_class = vec(d);
  for (std::size_t l = 0; l < config.layers; ++l) {
    ViTLayer layer;
    layer.ln1_scale.assign(d, 1.0);
    layer.ln1_shift.assign(d, 0.0);
    layer.ln2_scale.assign(d, 1.0);
    layer.ln2_shift.assign(d, 0.0);
    for (std::size_t i = 0; i < h; ++i) {
      layer.w_q.push_back(mat(d, d / h));
      layer.w_k.push_back(mat(d, d / h));
      layer.w_v.push_back(mat(d, d / h));
    }
    layer.w_o = mat(d, d);
    layer.w1 = mat(d, ff);
    layer.b1 = vec(ff);
    layer.w2 = mat(ff, d);
    layer.b2 = vec(d);
    p.layers.push_back(std::move(layer));
  }
  p.ln_final_scale.assign(d, 1.0);
  p.ln_final_shift.assign(d, 0.0);
  return p;
}

inline ViTParams vit_init(std::size_t patch_dim, std::size_t d, std::size_t d_ff, std::size_t n_patches,
                          std::size_t layers, std::uint64_t seed, std::string mechanism = "softmax") {
  ViTConfig c;
  c.patch_dim = patch_dim;
  c.d = d;
  c.d_ff = d_ff;
  c.n_patches = n_patches;
  c.layers = layers;
  c.mechanism = std::move(mechanism);
  return vit_init(c, seed);
}

/// FNV-1a over every parameter in initialization order.
inline std::uint64_t params_checksum(const ViTParams& p) {
  Fnv1a h;
  auto vec = [&](const std::vector<double>& v) { h.update(std::span<const double>(v)); };
  h.update(p.e);
  h.update(p.e_pos);
  vec(p.x_class);
  for (const auto& l : p.layers) {
    vec(l.ln1_scale);
    vec(l.ln1_shift);
    vec(l.ln2_scale);
    vec(l.ln2_shift);
    for (const auto& w : l.w_q) h.update(w);
    for (const auto& w : l.w_k) h.update(w);
    for (const auto& w : l.w_v) h.update(w);
    h.update(l.w_o);
    h.update(l.w1);
    vec(l.b1);
    h.update(l.w2);
    vec(l.b2);
  }
  vec(p.ln_final_scale);
  vec(p.ln_final_shift);
  return h.value();
}

/// Row-wise (x - mean) / sqrt(var + eps) with the biased variance.
inline RealMatrix layer_norm_normalized(const RealMatrix& x, double eps = kLayerNormEpsilon) {
  RealMatrix out(x.rows(), x.cols());
  const double inv_d = 1.0 / static_cast<double>(x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double mean = 0.0;
    for (double v : x.row(i)) mean += v;
    mean *= inv_d;
    double var = 0.0;
    for (double v : x.row(i)) var += (v - mean) * (v - mean);
    var *= inv_d;
    const double inv_std = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = (x(i, j) - mean) * inv_std;
  }
  return out;
}

inline RealMatrix layer_norm(const RealMatrix& x, const std::vector<double>& scale,
                             const std::vector<double>& shift, double eps = kLayerNormEpsilon) {
  if (scale.size() != x.cols() || shift.size() != x.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "layer_norm: scale/shift length must equal row width");
  }
  RealMatrix out = layer_norm_normalized(x, eps);
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) = out(i, j) * scale[j] + shift[j];
  return out;
}

/// GELU, exact erf form.
inline double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

struct ViTTrace {
  RealMatrix z0;
  std::vector<RealMatrix> z_prime;  // z'_l, l = 1..L
  std::vector<RealMatrix> z;        // z_l, l = 1..L
  std::vector<double> y;
};

namespace detail {

inline void add_bias(RealMatrix& m, const std::vector<double>& b) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) += b[j];
}

inline MultiHeadSpec layer_heads(const ViTLayer& l, const MechanismFn& mech) {
  MultiHeadSpec spec;
  spec.heads = l.w_q.size();
  spec.w_q = l.w_q;
  spec.w_k = l.w_k;
  spec.w_v = l.w_v;
  spec.w_o = l.w_o;
  spec.mechanism = mech;
  return spec;
}

}  // namespace detail

/// Full forward pass keeping every intermediate. patches is N x patch_dim.
inline ViTTrace vit_forward_trace(const ViTParams& p, const RealMatrix& patches) {
  const ViTConfig& c = p.config;
  if (patches.rows() != c.n_patches || patches.cols() != c.patch_dim) {
    throw Error(ErrorCode::DimensionMismatch, "vit_forward: patches are " + shape_of(patches) +
                                                  ", expected " + std::to_string(c.n_patches) + "x" +
                                                  std::to_string(c.patch_dim));
  }
  require_finite(patches, "vit_forward patches");
  const std::size_t d = c.d;

  ViTTrace tr;
  const RealMatrix embedded = gemm(patches, p.e);
  tr.z0 = RealMatrix(c.n_patches + 1, d);
  for (std::size_t j = 0; j < d; ++j) tr.z0(0, j) = p.x_class[j] + p.e_pos(0, j);
  for (std::size_t i = 0; i < c.n_patches; ++i)
    for (std::size_t j = 0; j < d; ++j) tr.z0(i + 1, j) = embedded(i, j) + p.e_pos(i + 1, j);

  tr.z_prime.reserve(p.layers.size());
  tr.z.reserve(p.layers.size());
  const RealMatrix* prev = &tr.z0;
  for (const ViTLayer& layer : p.layers) {
    const RealMatrix x = layer_norm(*prev, layer.ln1_scale, layer.ln1_shift);
    const RealMatrix msa = multi_head(RealAttnInputs(x, x, x), detail::layer_heads(layer, p.mechanism));
    tr.z_prime.push_back(msa + *prev);

    RealMatrix hidden = gemm(layer_norm(tr.z_prime.back(), layer.ln2_scale, layer.ln2_shift), layer.w1);
    detail::add_bias(hidden, layer.b1);
    for (double& v : hidden.data()) v = gelu(v);
    RealMatrix mlp = gemm(hidden, layer.w2);
    detail::add_bias(mlp, layer.b2);
    tr.z.push_back(mlp + tr.z_prime.back());
    prev = &tr.z.back();
  }

  RealMatrix cls(1, d);
  for (std::size_t j = 0; j < d; ++j) cls(0, j) = (*prev)(0, j);
  const RealMatrix y = layer_norm(cls, p.ln_final_scale, p.ln_final_shift);
  tr.y.assign(y.data().begin(), y.data().end());
  return tr;
}

inline std::vector<double> vit_forward(const ViTParams& p, const RealMatrix& patches) {
  return vit_forward_trace(p, patches).y;
}

/// Deterministic N x patch_dim input for a seed.
inline RealMatrix random_patches(const ViTConfig& c, std::uint64_t seed) {
  Rng rng(mix_seed(seed ^ 0x5851f42d4c957f2dULL));
  return random_matrix(rng, c.n_patches, c.patch_dim);
}

}  // namespace tensorattn
