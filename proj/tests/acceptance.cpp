// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "tensorattn/tensorattn.hpp"

using namespace tensorattn;

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::size_t kSeqLengths[] = {2, 3, 4, 8, 16, 32, 64};
constexpr std::size_t kWidths[] = {1, 2, 4, 8, 16};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

RealAttnInputs random_inputs(std::uint64_t seed, std::size_t n, std::size_t d, std::size_t dv) {
  Rng rng(mix_seed(seed));
  RealMatrix q = random_matrix(rng, n, d);
  RealMatrix k = random_matrix(rng, n, d);
  RealMatrix v = random_matrix(rng, n, dv);
  return RealAttnInputs(std::move(q), std::move(k), std::move(v));
}

// Seed s covers one (n, d) cell of the grid; 100 seeds sweep all 35 cells.
std::pair<std::size_t, std::size_t> grid_shape(std::uint64_t seed) {
  return {kSeqLengths[seed % 7], kWidths[(seed / 7) % 5]};
}

template <Scalar T>
double psd_violation(const Matrix<T>& t, Rng& rng, int probes) {
  // Largest normalized shortfall below -1e-10 ||T||_F ||x||^2; <= 0 means every probe passed.
  double worst = -std::numeric_limits<double>::infinity();
  const double fro = frobenius_norm(t);
  for (int p = 0; p < probes; ++p) {
    Matrix<T> x;
    if constexpr (is_complex_v<T>) {
      x = random_complex_matrix(rng, t.rows(), 1);
    } else {
      x = random_matrix(rng, t.rows(), 1);
    }
    const double q = std::real(gemm(x, gemm(t, x), Op::ConjTrans, Op::None)(0, 0));
    const double bound = -1e-10 * fro * frobenius_norm2(x);
    worst = std::max(worst, bound - q);
  }
  return worst;
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

Outcome path_equivalence() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::size_t cases = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    for (std::size_t n : kSeqLengths) {
      for (std::size_t d : kWidths) {
        const auto in = random_inputs(seed * 1000 + n * 20 + d, n, d, 1 + seed % 4);
        for (Side side : {Side::Query, Side::Key}) {
          TensorOpConfig cfg;
          cfg.side = side;
          worst = std::max(worst, max_abs_diff(tensor_attention_linear(in, side), tensor_attention_naive(in, cfg)));
          ++cases;
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu cases, max abs diff %.3e (< 1e-10), %.2f s (< 30 s)", cases, worst, secs);
  return {worst < 1e-10 && secs < 30.0, buf};
}

Outcome trace_identities() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto [n, d] = grid_shape(seed);
    const auto in = random_inputs(seed, n, d, 1);
    const double fro = frobenius_norm2(gemm(in.q(), in.k(), Op::None, Op::ConjTrans));
    TensorOpConfig k_side;
    k_side.side = Side::Key;
    const double tq = trace(build_tensor_operator(in.q(), in.k(), TensorOpConfig{}));
    const double tk = trace(build_tensor_operator(in.q(), in.k(), k_side));
    const double gram = sum(hadamard(herk(in.k(), Op::ConjTrans), herk(in.q(), Op::ConjTrans)));
    for (double x : {tq, tk, gram, tensor_trace(in.q(), in.k())}) {
      worst = std::max(worst, std::abs(x - fro) / fro);
    }
  }
  char buf[120];
  std::snprintf(buf, sizeof buf, "100 seeds, max relative error %.3e (< 1e-10)", worst);
  return {worst < 1e-10, buf};
}

Outcome psd_and_diagonal() {
  double min_diag = std::numeric_limits<double>::infinity();
  double worst_probe = -std::numeric_limits<double>::infinity();
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto [n, d] = grid_shape(seed);
    const auto in = random_inputs(seed, n, d, 1);
    Rng rng(mix_seed(seed + 5000));
    for (Side side : {Side::Query, Side::Key}) {
      for (bool had : {false, true}) {
        TensorOpConfig cfg;
        cfg.side = side;
        cfg.hadamard = had;
        const RealMatrix t = build_tensor_operator(in.q(), in.k(), cfg);
        for (double x : diagonal(t)) min_diag = std::min(min_diag, x);
        if (!had) worst_probe = std::max(worst_probe, psd_violation(t, rng, 20));
      }
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "min diag %.3e (>= 0), worst PSD probe shortfall %.3e (<= 0), 20 probes/instance",
                min_diag, worst_probe);
  return {min_diag >= 0.0 && worst_probe <= 0.0, buf};
}

Outcome fast_diagonal() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto [n, d] = grid_shape(seed);
    const auto in = random_inputs(seed, n, d, 1);
    for (Side side : {Side::Query, Side::Key}) {
      const auto fast = diag_fast(in.q(), in.k(), side);
      const auto slow = diag_naive(in.q(), in.k(), side);
      for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(fast[i] - slow[i]));
    }
  }

  BenchConfig fast_cfg;
  fast_cfg.variants = {"diag-fast"};
  fast_cfg.n_values = {4096, 8192};
  fast_cfg.d = 32;
  fast_cfg.d_v = 32;
  fast_cfg.repetitions = 31;
  fast_cfg.warmup = 5;
  BenchConfig naive_cfg = fast_cfg;
  naive_cfg.variants = {"diag-naive"};
  naive_cfg.repetitions = 3;
  naive_cfg.warmup = 0;

  const auto fast_summary = summarize(run_bench(fast_cfg));
  const auto naive_summary = summarize(run_bench(naive_cfg));
  const double fast_ratio = fast_summary.ratio("diag-fast", 4096)->ratio;
  const double naive_ratio = naive_summary.ratio("diag-naive", 4096)->ratio;
  const double secs = seconds_since(t0);
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "max diff %.3e (< 1e-10), fast doubling %.2f in [1.5, 2.7], naive doubling %.2f (> 3.2), %.1f s (< 120 s)",
                worst, fast_ratio, naive_ratio, secs);
  const bool pass = worst < 1e-10 && fast_ratio >= 1.5 && fast_ratio <= 2.7 && naive_ratio > 3.2 && secs < 120.0;
  return {pass, buf};
}

Outcome lemma_boundary() {
  const RealMatrix a{{0, 1}, {0, 0}};
  const auto cx = trace_identity_report(a, transpose(a));
  bool ok = cx.tr_ab == 1.0 && cx.sum_hadamard == 0.0 && cx.sum_hadamard_transposed == 1.0 && cx.general_identity &&
            !cx.b_symmetric && !cx.symmetric_identity.has_value();
  // The general identity holds for every pair; the symmetric one only where B = B^T.
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(mix_seed(seed));
    const std::size_t m = 1 + seed % 6;
    const RealMatrix x = random_matrix(rng, m, m);
    const RealMatrix y = random_matrix(rng, m, m);
    const auto general = trace_identity_report(x, y);
    ok = ok && general.general_identity && (m == 1 || !general.symmetric_identity.has_value());
    const auto sym = trace_identity_report(x, y + transpose(y));
    ok = ok && sym.general_identity && sym.symmetric_identity.value_or(false);
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "counterexample tr(AB)=%g, sum(A.*B)=%g, sum(A.*B^T)=%g; general and symmetric identities hold",
                cx.tr_ab, cx.sum_hadamard, cx.sum_hadamard_transposed);
  return {ok, buf};
}

Outcome matrix_exponential() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(mix_seed(seed));
    const std::size_t m = 1 + seed % 8;
    RealMatrix a = random_matrix(rng, m, m);
    const double scale = rng.uniform(0.05, 1.0) / norm1(a);
    a = scale * a;
    worst = std::max(worst, max_abs_diff(expm_taylor(a, 30), expm_pade(a, 6, 6)));
  }
  const RealMatrix nil{{0, 1}, {0, 0}};
  const RealMatrix expected{{1, 1}, {0, 1}};
  const bool nil_exact = expm_pade(nil, 6, 6) == expected && expm_taylor(nil, 30) == expected && expm(nil) == expected;
  const double scalar = expm_pade(RealMatrix{{1.0}}, 2, 2, std::numeric_limits<double>::infinity())(0, 0);
  const double scalar_dev = std::abs(scalar - 19.0 / 7.0);
  char buf[200];
  std::snprintf(buf, sizeof buf, "Taylor(30) vs Pade[6/6] max diff %.3e (< 1e-8), nilpotent %s, [2/2](1) - 19/7 = %.3e",
                worst, nil_exact ? "exact" : "inexact", scalar_dev);
  return {worst < 1e-8 && nil_exact && scalar_dev < 1e-12, buf};
}

Outcome relu_trace() {
  std::size_t instances = 0, mismatches = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto [n, d] = grid_shape(seed);
    const auto in = random_inputs(seed, n, d, 1);
    for (Side side : {Side::Query, Side::Key}) {
      for (bool had : {false, true}) {
        TensorOpConfig cfg;
        cfg.side = side;
        cfg.hadamard = had;
        const RealMatrix t = build_tensor_operator(in.q(), in.k(), cfg);
        RealMatrix r = t;
        for (std::size_t i = 0; i < r.rows(); ++i) {
          for (double& x : r.row(i)) x = std::max(x, 0.0);
        }
        mismatches += trace(r) != trace(t);
        ++instances;
      }
    }
  }
  return {mismatches == 0, std::to_string(instances) + " instances, " + std::to_string(mismatches) + " inexact"};
}

Outcome kron_vec() {
  double worst = 0.0;
  bool all = true;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(mix_seed(seed));
    const std::size_t n = 1 + seed % 4, d = 1 + (seed / 4) % 4;
    const auto rep = kron_vec_check(random_matrix(rng, n, d), random_matrix(rng, n, d));
    all = all && rep.all_pass();
    worst = std::max(worst, rep.max_deviation());
  }
  Rng rng(mix_seed(99));
  const auto control = kron_vec_check(random_matrix(rng, 3, 2), random_matrix(rng, 3, 2), VecConvention::RowStacking);
  char buf[160];
  std::snprintf(buf, sizeof buf, "50 seeds, max deviation %.3e (< 1e-12), row-stacking control %s", worst,
                control.all_pass() ? "passed (wrong)" : "failed");
  return {all && worst < 1e-12 && !control.all_pass(), buf};
}

Outcome partial_traces() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(mix_seed(seed));
    const std::size_t m = 2 + seed % 2, n = 2 + (seed / 2) % 2;
    const RealMatrix a = random_matrix(rng, m, m);
    const RealMatrix b = random_matrix(rng, n, n);
    const RealMatrix ab = kron(a, b);
    const RealMatrix tw = partial_trace(ab, PartialTraceSpec{m, n, TracedSide::TraceOutW});
    const RealMatrix tv = partial_trace(ab, PartialTraceSpec{m, n, TracedSide::TraceOutV});
    worst = std::max(worst, max_abs_diff(tw, trace(b) * a));
    worst = std::max(worst, max_abs_diff(tv, trace(a) * b));
    const RealMatrix t = random_matrix(rng, m * n, m * n);
    worst = std::max(worst, std::abs(trace(partial_trace(t, PartialTraceSpec{m, n, TracedSide::TraceOutW})) - trace(t)));
    worst = std::max(worst, std::abs(trace(partial_trace(t, PartialTraceSpec{m, n, TracedSide::TraceOutV})) - trace(t)));
  }
  char buf[120];
  std::snprintf(buf, sizeof buf, "50 pairs, max deviation %.3e (< 1e-12)", worst);
  return {worst < 1e-12, buf};
}

Outcome interaction() {
  bool shapes = true;
  double trace_err = 0.0, oracle = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto [n, d] = grid_shape(seed);
    const auto in = random_inputs(seed, n, d, d);
    for (Side side : {Side::Query, Side::Key}) {
      InteractionConfig cfg;
      cfg.side = side;
      const RealMatrix t = build_interaction_operator(in.q(), in.k(), cfg);
      shapes = shapes && t.rows() == d && t.cols() == d;
      const double fro = frobenius_norm2(gemm(in.q(), in.k(), Op::ConjTrans, Op::None));
      trace_err = std::max(trace_err, std::abs(trace(t) - fro) / fro);
      const char* id = side == Side::Query ? "tensor-interaction" : "tensor-interaction-k";
      oracle = std::max(oracle, max_abs_diff(tensor_interaction(in, cfg), naive_reference(in, id)));
    }
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "shape d x d for every n: %s, trace relative error %.3e (< 1e-10), oracle diff %.3e (< 1e-10)",
                shapes ? "yes" : "no", trace_err, oracle);
  return {shapes && trace_err < 1e-10 && oracle < 1e-10, buf};
}

Outcome fd_gradients() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto in = random_inputs(seed, 4, 3, 3);
    Rng rng(mix_seed(seed + 777));
    std::vector<double> u(4), w(3);
    for (double& x : u) x = rng.uniform(-1.0, 1.0);
    for (double& x : w) x = rng.uniform(-1.0, 1.0);
    const auto g_naive = fd_probe("tensor-naive", in, u, w, 1e-5);
    const auto g_linear = fd_probe("tensor-linear", in, u, w, 1e-5);
    for (std::size_t i = 0; i < g_naive.size(); ++i) worst = std::max(worst, std::abs(g_naive[i] - g_linear[i]));
  }
  char buf[120];
  std::snprintf(buf, sizeof buf, "10 seeds, max gradient diff %.3e (< 1e-4)", worst);
  return {worst < 1e-4, buf};
}

Outcome vit_integration() {
  const auto t0 = Clock::now();
  std::size_t runs = 0, nondeterministic = 0, nonfinite = 0, errors = 0;
  std::string first_error;
  for (const auto& m : mechanisms()) {
    ViTConfig cfg;
    cfg.n_patches = 4;
    cfg.d = 8;
    cfg.layers = 2;
    cfg.mechanism = m.id;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      ++runs;
      try {
        const auto patches = random_patches(cfg, seed);
        const auto y1 = vit_forward(vit_init(cfg, seed), patches);
        const auto y2 = vit_forward(vit_init(cfg, seed), random_patches(cfg, seed));
        nondeterministic += y1 != y2;
        nonfinite += !std::all_of(y1.begin(), y1.end(), [](double x) { return std::isfinite(x); });
      } catch (const Error& e) {
        if (first_error.empty()) first_error = m.id + " seed " + std::to_string(seed) + ": " + e.what();
        ++errors;
      }
    }
  }
  const double secs = seconds_since(t0);
  char buf[200];
  std::snprintf(buf, sizeof buf, "%zu runs over %zu mechanisms, %zu nondeterministic, %zu non-finite, %zu errors, %.2f s (< 60 s)",
                runs, mechanisms().size(), nondeterministic, nonfinite, errors, secs);
  std::string detail = buf;
  if (!first_error.empty()) detail += "; first error: " + first_error;
  return {nondeterministic == 0 && nonfinite == 0 && errors == 0 && secs < 60.0, detail};
}

Outcome complex_path() {
  double herm = 0.0, diag_imag = 0.0;
  double min_diag = std::numeric_limits<double>::infinity();
  double worst_probe = -std::numeric_limits<double>::infinity();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(mix_seed(seed));
    const std::size_t n = kSeqLengths[seed % 7], d = kWidths[(seed / 7) % 5];
    const ComplexMatrix q = random_complex_matrix(rng, n, d);
    const ComplexMatrix k = random_complex_matrix(rng, n, d);
    for (Side side : {Side::Query, Side::Key}) {
      TensorOpConfig cfg;
      cfg.side = side;
      const ComplexMatrix t = build_tensor_operator(q, k, cfg);
      herm = std::max(herm, hermitian_defect(t));
      for (const auto& z : diagonal(t)) {
        diag_imag = std::max(diag_imag, std::abs(z.imag()));
        min_diag = std::min(min_diag, z.real());
      }
      worst_probe = std::max(worst_probe, psd_violation(t, rng, 20));
    }
  }
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "Hermitian defect %.3e (< 1e-12), max |Im diag| %.3e, min Re diag %.3e (>= 0), PSD shortfall %.3e (<= 0)",
                herm, diag_imag, min_diag, worst_probe);
  return {herm < 1e-12 && diag_imag == 0.0 && min_diag >= 0.0 && worst_probe <= 0.0, buf};
}

}  // namespace

int main() {
  openblas_set_num_threads(1);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"path equivalence (linear vs naive)", path_equivalence},
      {"trace identities", trace_identities},
      {"non-negative diagonal and PSD", psd_and_diagonal},
      {"fast diagonal and doubling ratios", fast_diagonal},
      {"trace lemma boundary", lemma_boundary},
      {"matrix exponential", matrix_exponential},
      {"ReLU trace preservation", relu_trace},
      {"Kronecker/vec oracle", kron_vec},
      {"partial trace", partial_traces},
      {"tensor interaction", interaction},
      {"finite-difference gradients", fd_gradients},
      {"ViT integration", vit_integration},
      {"complex path", complex_path},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  std::cout << (failures == 0 ? "all 13 criteria pass" : std::to_string(failures) + " criteria failed") << '\n';
  return failures == 0 ? 0 : 1;
}
