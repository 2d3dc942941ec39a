#pragma once

// Brute-force references. Everything here uses its own index loops and does
// not call the BLAS-backed products, so a bug in a fast path cannot be
// mirrored by its oracle.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tensorattn/attention_inputs.hpp"
#include "tensorattn/dense.hpp"
#include "tensorattn/mechanisms.hpp"

namespace tensorattn {

inline constexpr double kOracleTolerance = 1e-12;
inline constexpr std::size_t kOracleMaxElements = 64;
inline constexpr std::size_t kNaiveReferenceMaxN = 256;

struct CheckLine {
  std::string name;
  double deviation = 0.0;
  bool pass = false;
};

struct OracleReport {
  std::vector<CheckLine> lines;

  bool all_pass() const {
    return std::all_of(lines.begin(), lines.end(), [](const CheckLine& l) { return l.pass; });
  }
  double max_deviation() const {
    double m = 0.0;
    for (const auto& l : lines) m = std::max(m, l.deviation);
    return m;
  }
  const CheckLine* find(std::string_view name) const {
    for (const auto& l : lines) {
      if (l.name == name) return &l;
    }
    return nullptr;
  }
  void add(std::string name, double deviation, double tol = kOracleTolerance) {
    lines.push_back({std::move(name), deviation, deviation <= tol});
  }
};

enum class VecConvention { ColumnStacking, RowStacking };

namespace oracle_detail {

inline std::vector<double> vec(const RealMatrix& m, VecConvention c) {
  std::vector<double> out;
  out.reserve(m.rows() * m.cols());
  if (c == VecConvention::ColumnStacking) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      for (std::size_t i = 0; i < m.rows(); ++i) out.push_back(m(i, j));
    }
  } else {
    for (std::size_t i = 0; i < m.rows(); ++i) {
      for (std::size_t j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
    }
  }
  return out;
}

inline RealMatrix kron_loops(const RealMatrix& a, const RealMatrix& b) {
  RealMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

inline RealMatrix outer(const std::vector<double>& x, const std::vector<double>& y) {
  RealMatrix out(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) out(i, j) = x[i] * y[j];
  return out;
}

/// max |kron[(i*n_b + k), (j*m_b + l)] - outer[(j*n_a + i), (l*n_b + k)]|:
/// the column-stacking index bijection between a (x) b and vec(a) vec(b)^T.
inline double bijection_deviation(const RealMatrix& kr, const RealMatrix& out, std::size_t na,
                                  std::size_t ma, std::size_t nb, std::size_t mb) {
  double dev = 0.0;
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < ma; ++j)
      for (std::size_t k = 0; k < nb; ++k)
        for (std::size_t l = 0; l < mb; ++l) {
          const double x = kr(i * nb + k, j * mb + l);
          const double y = out(j * na + i, l * nb + k);
          dev = std::max(dev, std::abs(x - y));
        }
  return dev;
}

inline double multiset_deviation(const RealMatrix& a, const RealMatrix& b) {
  std::vector<double> x(a.data().begin(), a.data().end());
  std::vector<double> y(b.data().begin(), b.data().end());
  if (x.size() != y.size()) return std::numeric_limits<double>::infinity();
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  double dev = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) dev = std::max(dev, std::abs(x[i] - y[i]));
  return dev;
}

inline RealMatrix matmul(const RealMatrix& a, const RealMatrix& b) {
  RealMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < a.cols(); ++t) s += a(i, t) * b(t, j);
      out(i, j) = s;
    }
  return out;
}

/// a b^T
inline RealMatrix matmul_bt(const RealMatrix& a, const RealMatrix& b) {
  RealMatrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < a.cols(); ++t) s += a(i, t) * b(j, t);
      out(i, j) = s;
    }
  return out;
}

/// a^T b
inline RealMatrix matmul_at(const RealMatrix& a, const RealMatrix& b) {
  RealMatrix out(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < a.rows(); ++t) s += a(t, i) * b(t, j);
      out(i, j) = s;
    }
  return out;
}

inline double trace_loops(const RealMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, i);
  return s;
}

inline void require_normalizer(double value, double eps, std::string_view what) {
  if (!(value >= eps)) {
    throw Error(ErrorCode::DegenerateNormalizer,
                "naive_reference: " + std::string(what) + " " + std::to_string(value) + " below epsilon");
  }
}

inline RealMatrix trace_normalized(RealMatrix t) {
  const double tr = trace_loops(t);
  require_normalizer(tr, 1e-12 * static_cast<double>(t.rows()), "trace");
  for (double& x : t.data()) x /= tr;
  return t;
}

/// e^A by 24-term Taylor on A / 2^s with ||A / 2^s||_inf <= 1/2, then s squarings.
inline RealMatrix expm_loops(const RealMatrix& a) {
  const std::size_t n = a.rows();
  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += std::abs(a(i, j));
    norm = std::max(norm, s);
  }
  int s = 0;
  double scale = 1.0;
  while (norm * scale > 0.5) {
    scale *= 0.5;
    ++s;
  }
  RealMatrix x = a;
  for (double& v : x.data()) v *= scale;
  RealMatrix result(n, n), term(n, n);
  for (std::size_t i = 0; i < n; ++i) result(i, i) = term(i, i) = 1.0;
  for (int k = 1; k <= 24; ++k) {
    term = matmul(term, x);
    for (double& v : term.data()) v /= static_cast<double>(k);
    for (std::size_t i = 0; i < n * n; ++i) result.data()[i] += term.data()[i];
  }
  for (int i = 0; i < s; ++i) result = matmul(result, result);
  return result;
}

}  // namespace oracle_detail

/// Checks, for small Q and K, that Q (x) K and vec(Q) vec(K)^T hold the same
/// entries under the column-stacking index bijection, that the same holds for
/// (Q K^T) (x) (Q K^T), and that tr((QK^T) (x) (QK^T)) = tr(QK^T)^2, also via
/// the partial trace. The library kron/vectorize/partial_trace are compared
/// with the loop versions. Using RowStacking plants a wrong convention.
inline OracleReport kron_vec_check(const RealMatrix& q, const RealMatrix& k,
                                   VecConvention conv = VecConvention::ColumnStacking) {
  if (q.size() > kOracleMaxElements || k.size() > kOracleMaxElements) {
    throw Error(ErrorCode::ShapeTooLarge, "kron_vec_check: Q is " + shape_of(q) + ", K is " +
                                              shape_of(k) + "; at most 64 entries each");
  }
  if (q.empty() || k.empty()) throw Error(ErrorCode::DimensionMismatch, "kron_vec_check: empty input");
  using namespace oracle_detail;
  OracleReport rep;

  const RealMatrix qk = kron_loops(q, k);
  const RealMatrix vv = outer(vec(q, conv), vec(k, conv));
  rep.add("kron entries multiset", multiset_deviation(qk, vv));
  rep.add("kron index bijection", bijection_deviation(qk, vv, q.rows(), q.cols(), k.rows(), k.cols()));

  if (q.cols() == k.cols()) {
    const RealMatrix a = matmul_bt(q, k);
    const std::size_t n = a.rows();
    const RealMatrix aa = kron_loops(a, a);
    const RealMatrix va = outer(vec(a, conv), vec(a, conv));
    rep.add("kron(A,A) bijection", bijection_deviation(aa, va, n, n, n, n));

    const double tr = trace_loops(a);
    const double scale = std::max(1.0, tr * tr);
    rep.add("trace kron(A,A) = tr(A)^2", std::abs(trace_loops(aa) - tr * tr) / scale);

    const RealMatrix reduced = partial_trace(aa, {n, n, TracedSide::TraceOutW});
    double pt_dev = std::abs(trace_loops(reduced) - tr * tr) / scale;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        pt_dev = std::max(pt_dev, std::abs(reduced(i, j) - tr * a(i, j)) / std::max(1.0, std::abs(tr)));
    rep.add("partial trace of kron(A,A)", pt_dev);
  }

  rep.add("library kron", max_abs_diff(kron(q, k), qk));
  const RealMatrix lib_vec = vectorize(q);
  const auto loop_vec = vec(q, conv);
  double vec_dev = 0.0;
  for (std::size_t i = 0; i < loop_vec.size(); ++i) vec_dev = std::max(vec_dev, std::abs(lib_vec(i, 0) - loop_vec[i]));
  rep.add("library vectorize", vec_dev);
  return rep;
}

struct TraceIdentityReport {
  double tr_ab = 0.0;
  double sum_hadamard = 0.0;             // sum(A .* B)
  double sum_hadamard_transposed = 0.0;  // sum(A .* B^T)
  bool b_symmetric = false;
  /// tr(AB) = sum(A .* B^T); holds for every square pair.
  bool general_identity = false;
  /// tr(AB) = sum(A .* B); asserted only when B is symmetric.
  std::optional<bool> symmetric_identity;
};

inline TraceIdentityReport trace_identity_report(const RealMatrix& a, const RealMatrix& b,
                                                 double tol = kOracleTolerance) {
  require_square(a, "trace_identity_report A");
  require_square(b, "trace_identity_report B");
  require_same_shape(a, b, "trace_identity_report");
  const std::size_t n = a.rows();
  TraceIdentityReport r;
  double scale = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      r.tr_ab += a(i, j) * b(j, i);
      r.sum_hadamard += a(i, j) * b(i, j);
      r.sum_hadamard_transposed += a(i, j) * b(j, i);
      scale += std::abs(a(i, j) * b(j, i));
    }
  }
  r.b_symmetric = true;
  for (std::size_t i = 0; i < n && r.b_symmetric; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (b(i, j) != b(j, i)) {
        r.b_symmetric = false;
        break;
      }
  r.general_identity = std::abs(r.tr_ab - r.sum_hadamard_transposed) <= tol * scale;
  if (r.b_symmetric) r.symmetric_identity = std::abs(r.tr_ab - r.sum_hadamard) <= tol * scale;
  return r;
}

/// Loop implementation of the registry variant `id` (see mechanisms()).
/// Interaction variants are returned n x d, matching the registry.
inline RealMatrix naive_reference(const RealAttnInputs& in, std::string_view id) {
  using namespace oracle_detail;
  mechanism_info(id);
  if (in.n() > kNaiveReferenceMaxN) {
    throw Error(ErrorCode::ShapeTooLarge, "naive_reference: n=" + std::to_string(in.n()) + " exceeds 256");
  }
  const RealMatrix& q = in.q();
  const RealMatrix& k = in.k();
  const RealMatrix& v = in.v();
  const std::size_t n = in.n();
  const std::size_t d = in.d();

  if (id == "softmax") {
    RealMatrix w(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t t = 0; t < d; ++t) s += q(i, t) * k(j, t);
        w(i, j) = s / std::sqrt(static_cast<double>(d));
        mx = std::max(mx, w(i, j));
      }
      double z = 0.0;
      for (std::size_t j = 0; j < n; ++j) z += (w(i, j) = std::exp(w(i, j) - mx));
      for (std::size_t j = 0; j < n; ++j) w(i, j) /= z;
    }
    return matmul(w, v);
  }

  if (id == "linear-kernel") {
    auto unit = [&](const RealMatrix& m, std::size_t i) {
      double s = 0.0;
      for (std::size_t t = 0; t < d; ++t) s += m(i, t) * m(i, t);
      return 1.0 / std::max(std::sqrt(s), 1e-12);
    };
    RealMatrix w(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      double den = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t t = 0; t < d; ++t) s += q(i, t) * k(j, t);
        w(i, j) = 1.0 + s * unit(q, i) * unit(k, j);
        den += w(i, j);
      }
      require_normalizer(den, 1e-12, "kernel denominator");
      for (std::size_t j = 0; j < n; ++j) w(i, j) /= den;
    }
    return matmul(w, v);
  }

  if (id == "tensor-interaction" || id == "tensor-interaction-k") {
    if (in.dv() != d) throw Error(ErrorCode::DvMismatch, "naive_reference: interaction needs d_v = d");
    const RealMatrix b = matmul_at(q, k);
    const RealMatrix t = trace_normalized(id == "tensor-interaction" ? matmul_bt(b, b) : matmul_at(b, b));
    return matmul_bt(v, t);
  }

  const RealMatrix a = matmul_bt(q, k);
  const bool k_side = id == "tensor-naive-k" || id == "tensor-linear-k";
  RealMatrix t(n, n);
  if (id == "tensor-hadamard") {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) t(i, j) = a(i, j) * a(j, i);
  } else {
    t = k_side ? matmul_at(a, a) : matmul_bt(a, a);
  }

  if (id == "tensor-residual") {
    const double tr = trace_loops(t);
    for (std::size_t i = 0; i < n; ++i) t(i, i) += tr;
    return matmul(t, v);
  }
  if (id == "tensor-diag" || id == "tensor-row") {
    const double eps = 1e-12 * static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      double den = 0.0;
      if (id == "tensor-diag") {
        den = t(i, i);
      } else {
        for (std::size_t j = 0; j < n; ++j) den += t(i, j);
      }
      require_normalizer(id == "tensor-row" ? std::abs(den) : den, eps, "row normalizer");
      for (std::size_t j = 0; j < n; ++j) t(i, j) /= den;
    }
    return matmul(t, v);
  }
  if (id == "tensor-relu") {
    const double tr = trace_loops(t);
    require_normalizer(tr, 1e-12 * static_cast<double>(n), "trace");
    for (double& x : t.data()) x = std::max(x, 0.0) / tr;
    return matmul(t, v);
  }
  if (id == "tensor-masked") {
    const double tr = trace_loops(t);
    require_normalizer(tr, 1e-12 * static_cast<double>(n), "trace");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) t(i, j) = j <= i ? t(i, j) / tr : 0.0;
    return matmul(t, v);
  }

  t = trace_normalized(std::move(t));
  if (id == "tensor-elem-exp") {
    for (double& x : t.data()) x = std::exp(x);
  } else if (id == "tensor-expm") {
    t = expm_loops(t);
  }
  return matmul(t, v);
}

/// Central-difference gradient of u^T F(Q, K, V) w with respect to vec(Q)
/// (column stacking: entry j*n + i is dQ[i, j]).
inline std::vector<double> fd_probe(const MechanismFn& fn, const RealAttnInputs& in,
                                    const std::vector<double>& u, const std::vector<double>& w,
                                    double h) {
  if (!(h >= 1e-7 && h <= 1e-3)) {
    throw Error(ErrorCode::InvalidArgument, "fd_probe: step must lie in [1e-7, 1e-3]");
  }
  if (u.size() != in.n() || w.size() != in.dv()) {
    throw Error(ErrorCode::DimensionMismatch, "fd_probe: probe vectors must have lengths n and d_v");
  }
  auto objective = [&](const RealMatrix& q) {
    const RealMatrix out = fn(RealAttnInputs(q, in.k(), in.v()));
    double s = 0.0;
    for (std::size_t i = 0; i < out.rows(); ++i)
      for (std::size_t j = 0; j < out.cols(); ++j) s += u[i] * out(i, j) * w[j];
    return s;
  };
  const std::size_t n = in.n();
  std::vector<double> grad(n * in.d());
  RealMatrix q = in.q();
  for (std::size_t j = 0; j < in.d(); ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const double orig = q(i, j);
      q(i, j) = orig + h;
      const double up = objective(q);
      q(i, j) = orig - h;
      const double down = objective(q);
      q(i, j) = orig;
      grad[j * n + i] = (up - down) / (2.0 * h);
    }
  }
  return grad;
}

inline std::vector<double> fd_probe(std::string_view id, const RealAttnInputs& in,
                                    const std::vector<double>& u, const std::vector<double>& w,
                                    double h) {
  return fd_probe(make_mechanism(id), in, u, w, h);
}

}  // namespace tensorattn
