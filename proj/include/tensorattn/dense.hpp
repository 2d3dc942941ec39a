#pragma once

// Dense row-major matrices over double / complex<double> and the handful of
// products the attention kernels are built from.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tensorattn/detail/blas.hpp"
#include "tensorattn/error.hpp"
#include "tensorattn/scalar.hpp"

namespace tensorattn {

template <Scalar T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;

  /// Zero-filled rows x cols matrix.
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  /// Takes ownership of row-major `data`; length must be rows*cols and every
  /// entry finite.
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw Error(ErrorCode::DimensionMismatch,
                  "Matrix: data length " + std::to_string(data_.size()) + " != " +
                      std::to_string(rows_) + "x" + std::to_string(cols_));
    }
    check_finite();
  }

  Matrix(std::initializer_list<std::initializer_list<T>> rows) : rows_(rows.size()) {
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
      if (row.size() != cols_) {
        throw Error(ErrorCode::DimensionMismatch, "Matrix: ragged initializer list");
      }
      data_.insert(data_.end(), row.begin(), row.end());
    }
    check_finite();
  }

  static Matrix identity(std::size_t n) {
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) out(i, i) = T{1};
    return out;
  }

  /// n x 1 column vector.
  static Matrix column(std::vector<T> values) {
    const std::size_t n = values.size();
    return Matrix(n, 1, std::move(values));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  T& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  std::span<T> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const T> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

  bool operator==(const Matrix&) const = default;

 private:
  void check_finite() const {
    for (std::size_t idx = 0; idx < data_.size(); ++idx) {
      if (!is_finite(data_[idx])) {
        throw Error(ErrorCode::NonFinite, "Matrix: non-finite entry at (" +
                                              std::to_string(idx / std::max<std::size_t>(cols_, 1)) +
                                              "," + std::to_string(idx % std::max<std::size_t>(cols_, 1)) +
                                              ")");
      }
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<complex128>;

/// Transposition flag for gemm/herk. ConjTrans is a plain transpose on reals.
enum class Op { None, ConjTrans };

template <Scalar T>
std::string shape_of(const Matrix<T>& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

template <Scalar T>
bool all_finite(const Matrix<T>& m) noexcept {
  return std::all_of(m.data().begin(), m.data().end(), [](T x) { return is_finite(x); });
}

/// Throws NonFinite naming `where` if any entry is NaN or infinite.
template <Scalar T>
void require_finite(const Matrix<T>& m, std::string_view where) {
  const auto d = m.data();
  for (std::size_t idx = 0; idx < d.size(); ++idx) {
    if (!is_finite(d[idx])) {
      throw Error(ErrorCode::NonFinite, std::string(where) + ": non-finite entry at (" +
                                            std::to_string(idx / m.cols()) + "," +
                                            std::to_string(idx % m.cols()) + ")");
    }
  }
}

template <Scalar T>
void require_square(const Matrix<T>& m, std::string_view where) {
  if (!m.is_square()) {
    throw Error(ErrorCode::NotSquare, std::string(where) + ": operand is " + shape_of(m));
  }
}

template <Scalar T>
void require_same_shape(const Matrix<T>& a, const Matrix<T>& b, std::string_view where) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(where) + ": shapes " + shape_of(a) + " and " + shape_of(b));
  }
}

/// op(A) * op(B).
template <Scalar T>
Matrix<T> gemm(const Matrix<T>& a, const Matrix<T>& b, Op trans_a = Op::None,
               Op trans_b = Op::None) {
  const bool ta = trans_a == Op::ConjTrans;
  const bool tb = trans_b == Op::ConjTrans;
  const std::size_t m = ta ? a.cols() : a.rows();
  const std::size_t ka = ta ? a.rows() : a.cols();
  const std::size_t kb = tb ? b.cols() : b.rows();
  const std::size_t n = tb ? b.rows() : b.cols();
  if (ka != kb) {
    throw Error(ErrorCode::DimensionMismatch,
                "gemm: op(A) is " + std::to_string(m) + "x" + std::to_string(ka) + ", op(B) is " +
                    std::to_string(kb) + "x" + std::to_string(n));
  }
  require_finite(a, "gemm");
  require_finite(b, "gemm");
  Matrix<T> c(m, n);
  if (m == 0 || n == 0 || ka == 0) return c;
  detail::blas_gemm<T>(ta, tb, m, n, ka, a.data().data(), std::max<std::size_t>(a.cols(), 1),
                       b.data().data(), std::max<std::size_t>(b.cols(), 1), c.data().data());
  require_finite(c, "gemm result");
  return c;
}

/// A A^H (Op::None) or A^H A (Op::ConjTrans). The result is exactly Hermitian
/// and its diagonal is a real sum of squared magnitudes.
template <Scalar T>
Matrix<T> herk(const Matrix<T>& a, Op trans = Op::None) {
  require_finite(a, "herk");
  const bool t = trans == Op::ConjTrans;
  const std::size_t n = t ? a.cols() : a.rows();
  const std::size_t k = t ? a.rows() : a.cols();
  Matrix<T> c(n, n);
  if (n == 0 || k == 0) return c;
  detail::blas_herk_upper<T>(t, n, k, a.data().data(), std::max<std::size_t>(a.cols(), 1),
                             c.data().data());
  for (std::size_t i = 0; i < n; ++i) {
    if constexpr (is_complex_v<T>) c(i, i) = T{c(i, i).real(), 0.0};
    for (std::size_t j = i + 1; j < n; ++j) c(j, i) = conj(c(i, j));
  }
  require_finite(c, "herk result");
  return c;
}

template <Scalar T>
Matrix<T> hadamard(const Matrix<T>& a, const Matrix<T>& b) {
  require_same_shape(a, b, "hadamard");
  require_finite(a, "hadamard");
  require_finite(b, "hadamard");
  Matrix<T> c(a.rows(), a.cols());
  auto out = c.data();
  const auto x = a.data();
  const auto y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  return c;
}

template <Scalar T>
T trace(const Matrix<T>& a) {
  require_square(a, "trace");
  T acc{};
  for (std::size_t i = 0; i < a.rows(); ++i) acc += a(i, i);
  return acc;
}

/// Kronecker product: block (i, j) of the result is A(i, j) * B.
template <Scalar T>
Matrix<T> kron(const Matrix<T>& a, const Matrix<T>& b) {
  require_finite(a, "kron");
  require_finite(b, "kron");
  const std::size_t p = b.rows();
  const std::size_t q = b.cols();
  Matrix<T> c(a.rows() * p, a.cols() * q);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const T s = a(i, j);
      for (std::size_t r = 0; r < p; ++r) {
        for (std::size_t t = 0; t < q; ++t) c(i * p + r, j * q + t) = s * b(r, t);
      }
    }
  }
  return c;
}

/// Column-stacking vec, so that vec(AXB) = (B^T kron A) vec(X).
template <Scalar T>
Matrix<T> vectorize(const Matrix<T>& a) {
  require_finite(a, "vectorize");
  std::vector<T> out;
  out.reserve(a.size());
  for (std::size_t j = 0; j < a.cols(); ++j) {
    for (std::size_t i = 0; i < a.rows(); ++i) out.push_back(a(i, j));
  }
  return Matrix<T>::column(std::move(out));
}

enum class TracedSide { TraceOutW, TraceOutV };

/// Operand lives on V (dim m) tensor W (dim n); basis vector e_k tensor f_l
/// sits at flat index k*n + l.
struct PartialTraceSpec {
  std::size_t dim_v = 0;
  std::size_t dim_w = 0;
  TracedSide traced = TracedSide::TraceOutW;
};

template <Scalar T>
Matrix<T> partial_trace(const Matrix<T>& t, const PartialTraceSpec& spec) {
  const std::size_t m = spec.dim_v;
  const std::size_t n = spec.dim_w;
  if (t.rows() != m * n || t.cols() != m * n) {
    throw Error(ErrorCode::DimensionMismatch, "partial_trace: operand is " + shape_of(t) +
                                                  ", expected " + std::to_string(m * n) + "x" +
                                                  std::to_string(m * n));
  }
  require_finite(t, "partial_trace");
  if (spec.traced == TracedSide::TraceOutW) {
    Matrix<T> out(m, m);
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t i = 0; i < m; ++i) {
        T acc{};
        for (std::size_t j = 0; j < n; ++j) acc += t(k * n + j, i * n + j);
        out(k, i) = acc;
      }
    }
    return out;
  }
  Matrix<T> out(n, n);
  for (std::size_t l = 0; l < n; ++l) {
    for (std::size_t j = 0; j < n; ++j) {
      T acc{};
      for (std::size_t i = 0; i < m; ++i) acc += t(i * n + l, i * n + j);
      out(l, j) = acc;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Elementwise helpers and reductions.

template <Scalar T>
Matrix<T> transpose(const Matrix<T>& a) {
  Matrix<T> out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  }
  return out;
}

/// Conjugate transpose.
template <Scalar T>
Matrix<T> adjoint(const Matrix<T>& a) {
  Matrix<T> out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = conj(a(i, j));
  }
  return out;
}

template <Scalar T>
Matrix<T> operator+(const Matrix<T>& a, const Matrix<T>& b) {
  require_same_shape(a, b, "operator+");
  Matrix<T> out = a;
  auto o = out.data();
  const auto y = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += y[i];
  return out;
}

template <Scalar T>
Matrix<T> operator-(const Matrix<T>& a, const Matrix<T>& b) {
  require_same_shape(a, b, "operator-");
  Matrix<T> out = a;
  auto o = out.data();
  const auto y = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= y[i];
  return out;
}

template <Scalar T>
Matrix<T> operator*(T s, const Matrix<T>& a) {
  Matrix<T> out = a;
  for (auto& x : out.data()) x *= s;
  return out;
}

template <Scalar T>
Matrix<T> operator*(const Matrix<T>& a, T s) {
  return s * a;
}

inline ComplexMatrix to_complex(const RealMatrix& a) {
  ComplexMatrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i];
  return out;
}

template <Scalar T>
T sum(const Matrix<T>& a) {
  T acc{};
  for (T x : a.data()) acc += x;
  return acc;
}

template <Scalar T>
std::vector<T> diagonal(const Matrix<T>& a) {
  require_square(a, "diagonal");
  std::vector<T> out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = a(i, i);
  return out;
}

/// Lower triangle including the diagonal; strictly-upper entries zeroed.
template <Scalar T>
Matrix<T> tril(const Matrix<T>& a) {
  Matrix<T> out = a;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = i + 1; j < a.cols(); ++j) out(i, j) = T{};
  }
  return out;
}

/// Sum of |a_ij|^2.
template <Scalar T>
double frobenius_norm2(const Matrix<T>& a) {
  double acc = 0.0;
  for (T x : a.data()) acc += abs2(x);
  return acc;
}

template <Scalar T>
double frobenius_norm(const Matrix<T>& a) {
  return std::sqrt(frobenius_norm2(a));
}

/// Induced 1-norm: maximum absolute column sum.
template <Scalar T>
double norm1(const Matrix<T>& a) {
  std::vector<double> col(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) col[j] += std::abs(a(i, j));
  }
  return col.empty() ? 0.0 : *std::max_element(col.begin(), col.end());
}

template <Scalar T>
double max_abs(const Matrix<T>& a) {
  double m = 0.0;
  for (T x : a.data()) m = std::max(m, std::abs(x));
  return m;
}

template <Scalar T>
double max_abs_diff(const Matrix<T>& a, const Matrix<T>& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  const auto x = a.data();
  const auto y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

/// max |A - A^H| entrywise.
template <Scalar T>
double hermitian_defect(const Matrix<T>& a) {
  require_square(a, "hermitian_defect");
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = i; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - conj(a(j, i))));
  }
  return m;
}

/// Rows scaled by the matching entry of `factors`: diag(factors) * A.
template <Scalar T>
Matrix<T> scale_rows(const Matrix<T>& a, std::span<const T> factors) {
  if (factors.size() != a.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "scale_rows: " + std::to_string(factors.size()) +
                                                  " factors for " + shape_of(a));
  }
  Matrix<T> out = a;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (T& x : out.row(i)) x *= factors[i];
  }
  return out;
}

}  // namespace tensorattn
