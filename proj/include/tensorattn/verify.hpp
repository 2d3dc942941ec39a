#pragma once

// Fixed-seed identity suite behind `tensorattn verify`. Each line reports the
// largest deviation found and whether it is within tolerance.

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "tensorattn/attention_inputs.hpp"
#include "tensorattn/dense.hpp"
#include "tensorattn/matrix_functions.hpp"
#include "tensorattn/mechanisms.hpp"
#include "tensorattn/oracle.hpp"
#include "tensorattn/random.hpp"
#include "tensorattn/tensor_attention.hpp"
#include "tensorattn/tensor_interaction.hpp"

namespace tensorattn {

struct VerifyOptions {
  /// Adds a kron/vec check under row stacking, which must fail.
  bool negative_control = false;
  std::size_t seeds = 20;
};

namespace verify_detail {

inline RealAttnInputs inputs(std::uint64_t seed, std::size_t n, std::size_t d, std::size_t dv) {
  Rng rng(mix_seed(seed * 0x9e37 + n * 131 + d));
  RealMatrix q = random_matrix(rng, n, d);
  RealMatrix k = random_matrix(rng, n, d);
  RealMatrix v = random_matrix(rng, n, dv);
  return RealAttnInputs(std::move(q), std::move(k), std::move(v));
}

/// Largest violation of x^H T x >= 0 over random probes, relative to ||T||_F ||x||^2.
template <Scalar T>
double psd_violation(const Matrix<T>& t, Rng& rng, int probes) {
  double worst = 0.0;
  const double fro = std::max(frobenius_norm(t), 1e-300);
  for (int p = 0; p < probes; ++p) {
    Matrix<T> x(t.rows(), 1);
    for (T& e : x.data()) {
      if constexpr (is_complex_v<T>) {
        e = T{rng.uniform(-1, 1), rng.uniform(-1, 1)};
      } else {
        e = rng.uniform(-1, 1);
      }
    }
    const T form = gemm(x, gemm(t, x), Op::ConjTrans, Op::None)(0, 0);
    worst = std::max(worst, -real_part(form) / (fro * frobenius_norm2(x)));
  }
  return worst;
}

}  // namespace verify_detail

inline OracleReport run_verify(const VerifyOptions& opts = {}) {
  using namespace verify_detail;
  OracleReport rep;
  const double tol = 1e-10;
  const std::size_t shapes[][2] = {{2, 1}, {3, 2}, {4, 4}, {8, 3}, {16, 8}, {32, 4}};

  double path = 0, trace_fro = 0, trace_sides = 0, diag = 0, diag_min = 0, psd = 0, relu = 0;
  double fast_vs_oracle = 0, interaction_trace = 0, interaction_oracle = 0;
  for (std::uint64_t s = 0; s < opts.seeds; ++s) {
    Rng rng(mix_seed(s + 1000));
    for (const auto& sh : shapes) {
      const auto in = inputs(s, sh[0], sh[1], sh[1]);
      path = std::max(path, max_abs_diff(tensor_attention_linear(in), tensor_attention_naive(in)));

      TensorOpConfig qcfg, kcfg;
      kcfg.side = Side::Key;
      const RealMatrix tq = build_tensor_operator(in.q(), in.k(), qcfg);
      const RealMatrix tk = build_tensor_operator(in.q(), in.k(), kcfg);
      const double fro = frobenius_norm2(gemm(in.q(), in.k(), Op::None, Op::ConjTrans));
      const double scale = std::max(fro, 1e-300);
      trace_fro = std::max(trace_fro, std::abs(trace(tq) - fro) / scale);
      trace_sides = std::max({trace_sides, std::abs(trace(tq) - trace(tk)) / scale,
                              std::abs(tensor_trace(in.q(), in.k()) - fro) / scale});

      const auto fast = diag_fast(in.q(), in.k());
      const auto slow = diag_naive(in.q(), in.k());
      for (std::size_t i = 0; i < fast.size(); ++i) {
        diag = std::max(diag, std::abs(fast[i] - slow[i]));
        diag_min = std::max({diag_min, -tq(i, i), -tk(i, i)});
      }
      psd = std::max({psd, psd_violation(tq, rng, 5), psd_violation(tk, rng, 5)});

      RealMatrix clamped = tq;
      for (double& x : clamped.data()) x = std::max(x, 0.0);
      relu = std::max(relu, std::abs(trace(clamped) - trace(tq)));

      for (const auto& m : mechanisms()) {
        try {
          // Row sums may be small without vanishing, so deviations scale with the output.
          const RealMatrix ref = naive_reference(in, m.id);
          fast_vs_oracle = std::max(fast_vs_oracle,
                                    max_abs_diff(make_mechanism(m.id)(in), ref) / std::max(1.0, max_abs(ref)));
        } catch (const Error& e) {
          // Both paths must agree on rejecting a degenerate row normalizer.
          if (e.code() != ErrorCode::DegenerateNormalizer) throw;
          bool oracle_rejects = false;
          try {
            naive_reference(in, m.id);
          } catch (const Error& e2) {
            oracle_rejects = e2.code() == ErrorCode::DegenerateNormalizer;
          }
          if (!oracle_rejects) fast_vs_oracle = std::max(fast_vs_oracle, 1.0);
        }
      }

      const RealMatrix bt = build_interaction_operator(in.q(), in.k());
      const double bfro = frobenius_norm2(gemm(in.q(), in.k(), Op::ConjTrans, Op::None));
      interaction_trace = std::max(interaction_trace, std::abs(trace(bt) - bfro) / std::max(bfro, 1e-300));
      interaction_oracle = std::max(interaction_oracle, max_abs_diff(tensor_interaction(in),
                                                                     naive_reference(in, "tensor-interaction")));
    }
  }
  rep.add("linear path equals naive path (trace normalization)", path, tol);
  rep.add("tr(T) = ||QK^T||_F^2", trace_fro, tol);
  rep.add("tr(T_Q) = tr(T_K) = sum((K^T K) .* (Q^T Q))", trace_sides, tol);
  rep.add("diag_fast equals materialized diagonal", diag, tol);
  rep.add("diag(T) >= 0 on both sides", diag_min, 0.0);
  rep.add("T positive semi-definite (probe)", psd, tol);
  rep.add("tr(ReLU(T)) = tr(T)", relu, 0.0);
  rep.add("every mechanism equals its loop reference (relative)", fast_vs_oracle, tol);
  rep.add("tr(interaction operator) = ||Q^T K||_F^2", interaction_trace, tol);
  rep.add("tensor_interaction equals loop reference", interaction_oracle, tol);

  {
    const RealMatrix a{{0, 1}, {0, 0}};
    const RealMatrix b{{0, 0}, {1, 0}};
    const auto r = trace_identity_report(a, b);
    const bool boundary = r.general_identity && !r.b_symmetric && r.tr_ab == 1.0 && r.sum_hadamard == 0.0;
    rep.add("tr(AB) = sum(A .* B^T), sum(A .* B) differs for non-symmetric B", boundary ? 0.0 : 1.0, 0.0);
    double sym = 0.0;
    for (std::uint64_t s = 0; s < opts.seeds; ++s) {
      const auto in = inputs(s, 6, 3, 1);
      const auto rs = trace_identity_report(herk(in.k(), Op::ConjTrans), herk(in.q(), Op::ConjTrans));
      sym = std::max(sym, std::abs(rs.tr_ab - rs.sum_hadamard) / std::max(1.0, std::abs(rs.tr_ab)));
      if (!rs.symmetric_identity.value_or(false) || !rs.general_identity) sym = std::max(sym, 1.0);
    }
    rep.add("tr(AB) = sum(A .* B) for symmetric Gram matrices", sym, tol);
  }

  {
    double agree = 0.0;
    for (std::uint64_t s = 0; s < opts.seeds; ++s) {
      Rng rng(mix_seed(s + 77));
      RealMatrix a = random_matrix(rng, 5, 5);
      const double target = rng.uniform(0.1, 1.0);
      a = (target / norm1(a)) * a;
      agree = std::max(agree, max_abs_diff(expm_taylor(a, 30), expm_pade(a, 6, 6)));
    }
    rep.add("Taylor(30) matches Pade[6/6]", agree, 1e-8);
    const RealMatrix nil{{0, 1}, {0, 0}};
    rep.add("exp of nilpotent [[0,1],[0,0]]", max_abs_diff(expm(nil), RealMatrix{{1, 1}, {0, 1}}), 0.0);
    const double inf = std::numeric_limits<double>::infinity();
    rep.add("scalar Pade[2/2] at 1 = 19/7", std::abs(expm_pade(RealMatrix{{1.0}}, 2, 2, inf)(0, 0) - 19.0 / 7.0),
            1e-12);
  }

  {
    double kv = 0.0;
    bool kv_pass = true;
    for (std::uint64_t s = 0; s < opts.seeds; ++s) {
      Rng rng(mix_seed(s + 5));
      const std::size_t n = 1 + s % 4, d = 1 + (s / 4) % 4;
      const auto r = kron_vec_check(random_matrix(rng, n, d), random_matrix(rng, n, d));
      kv = std::max(kv, r.max_deviation());
      kv_pass = kv_pass && r.all_pass();
    }
    rep.add("kron/vec column-stacking bijection", kv_pass ? kv : std::max(kv, 1.0), kOracleTolerance);
    if (opts.negative_control) {
      Rng rng(mix_seed(99));
      const auto r = kron_vec_check(random_matrix(rng, 3, 2), random_matrix(rng, 3, 2), VecConvention::RowStacking);
      const auto* line = r.find("kron index bijection");
      rep.add("negative control: kron/vec bijection under row stacking", line ? line->deviation : 1.0,
              kOracleTolerance);
    }
  }

  {
    double pt = 0.0;
    for (std::uint64_t s = 0; s < opts.seeds; ++s) {
      Rng rng(mix_seed(s + 11));
      const std::size_t m = 2 + s % 2;
      const RealMatrix a = random_matrix(rng, m, m), b = random_matrix(rng, m, m);
      const RealMatrix ab = kron(a, b);
      pt = std::max({pt, max_abs_diff(partial_trace(ab, {m, m, TracedSide::TraceOutW}), trace(b) * a),
                     max_abs_diff(partial_trace(ab, {m, m, TracedSide::TraceOutV}), trace(a) * b),
                     std::abs(trace(partial_trace(ab, {m, m, TracedSide::TraceOutW})) - trace(ab))});
    }
    rep.add("partial traces of A (x) B", pt, 1e-12);
  }

  {
    double herm = 0.0, neg = 0.0, psd_c = 0.0;
    for (std::uint64_t s = 0; s < opts.seeds; ++s) {
      Rng rng(mix_seed(s + 31));
      const ComplexMatrix q = random_complex_matrix(rng, 5, 3), k = random_complex_matrix(rng, 5, 3);
      for (Side side : {Side::Query, Side::Key}) {
        TensorOpConfig cfg;
        cfg.side = side;
        const ComplexMatrix t = build_tensor_operator(q, k, cfg);
        herm = std::max(herm, hermitian_defect(t));
        for (std::size_t i = 0; i < t.rows(); ++i) neg = std::max({neg, -t(i, i).real(), std::abs(t(i, i).imag())});
        psd_c = std::max(psd_c, psd_violation(t, rng, 5));
      }
    }
    rep.add("complex T Hermitian", herm, 1e-12);
    rep.add("complex T diagonal real and non-negative", neg, 0.0);
    rep.add("complex T positive semi-definite (probe)", psd_c, tol);
  }
  return rep;
}

inline void print_verify_report(std::ostream& os, const OracleReport& rep) {
  for (const auto& l : rep.lines) {
    os << (l.pass ? "PASS  " : "FAIL  ") << l.name << "  max_deviation=" << l.deviation << '\n';
  }
  os << (rep.all_pass() ? "all identities hold" : "verification failed") << '\n';
}

}  // namespace tensorattn
