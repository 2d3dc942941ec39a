#pragma once

// Matrix exponential by truncated Taylor series or [m/n] Pade approximant,
// both wrapped in scaling and squaring.

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "tensorattn/dense.hpp"
#include "tensorattn/lu.hpp"

namespace tensorattn {

enum class ExpmMethod { Taylor, Pade };

/// Pade denominators whose estimated 1-norm condition number exceeds this are
/// rejected with SingularDenominator.
inline constexpr double kMaxDenominatorCondition = 1e12;

struct ExpmSpec {
  ExpmMethod method = ExpmMethod::Pade;
  int taylor_terms = 30;
  int pade_m = 6;
  int pade_n = 6;
  /// Scaling and squaring kicks in when ||A||_1 exceeds this. +inf disables it.
  double scaling_threshold = 0.5;

  static ExpmSpec taylor(int terms, double threshold = 0.5) {
    return {ExpmMethod::Taylor, terms, 6, 6, threshold};
  }
  static ExpmSpec pade(int m, int n, double threshold = 0.5) {
    return {ExpmMethod::Pade, 30, m, n, threshold};
  }

  void validate() const {
    if (method == ExpmMethod::Taylor && taylor_terms < 1) {
      throw Error(ErrorCode::InvalidArgument, "ExpmSpec: taylor_terms must be >= 1");
    }
    if (method == ExpmMethod::Pade && (pade_m < 1 || pade_n < 1)) {
      throw Error(ErrorCode::InvalidArgument, "ExpmSpec: Pade degrees must be >= 1");
    }
    if (!(scaling_threshold > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "ExpmSpec: scaling_threshold must be positive");
    }
  }
};

/// Numerator and denominator coefficients of the [m/n] Pade approximant of
/// exp(x), lowest degree first, normalized so both constant terms are 1.
inline std::pair<std::vector<double>, std::vector<double>> pade_exp_coefficients(int m, int n) {
  std::vector<double> p(static_cast<std::size_t>(m) + 1);
  std::vector<double> q(static_cast<std::size_t>(n) + 1);
  p[0] = 1.0;
  q[0] = 1.0;
  const double total = static_cast<double>(m + n);
  for (int j = 1; j <= m; ++j) {
    p[j] = p[j - 1] * static_cast<double>(m - j + 1) / (static_cast<double>(j) * (total - j + 1));
  }
  for (int j = 1; j <= n; ++j) {
    q[j] = -q[j - 1] * static_cast<double>(n - j + 1) / (static_cast<double>(j) * (total - j + 1));
  }
  return {std::move(p), std::move(q)};
}

namespace detail {

/// Number of halvings s so that ||A||_1 / 2^s <= threshold.
inline int scaling_exponent(double norm, double threshold) {
  int s = 0;
  while (norm > threshold && s < 2048) {
    norm *= 0.5;
    ++s;
  }
  return s;
}

template <Scalar T>
Matrix<T> scaled_by_pow2(const Matrix<T>& a, int s) {
  Matrix<T> out = a;
  if (s == 0) return out;
  for (T& x : out.data()) {
    if constexpr (is_complex_v<T>) {
      x = T{std::ldexp(x.real(), -s), std::ldexp(x.imag(), -s)};
    } else {
      x = std::ldexp(x, -s);
    }
  }
  return out;
}

template <Scalar T>
Matrix<T> square_repeatedly(Matrix<T> x, int s) {
  for (int i = 0; i < s; ++i) x = gemm(x, x);
  return x;
}

template <Scalar T>
void add_scaled(Matrix<T>& acc, double c, const Matrix<T>& term) {
  auto a = acc.data();
  const auto t = term.data();
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += c * t[i];
}

template <Scalar T>
Matrix<T> taylor_unscaled(const Matrix<T>& a, int terms) {
  Matrix<T> result = Matrix<T>::identity(a.rows());
  Matrix<T> term = Matrix<T>::identity(a.rows());
  for (int k = 1; k <= terms; ++k) {
    term = gemm(term, a);
    const double inv_k = 1.0 / static_cast<double>(k);
    for (T& x : term.data()) x *= inv_k;
    add_scaled(result, 1.0, term);
  }
  return result;
}

template <Scalar T>
Matrix<T> pade_unscaled(const Matrix<T>& a, int m, int n) {
  const auto [p, q] = pade_exp_coefficients(m, n);
  const std::size_t order = a.rows();
  Matrix<T> num = Matrix<T>::identity(order);
  Matrix<T> den = Matrix<T>::identity(order);
  Matrix<T> power = Matrix<T>::identity(order);
  const int top = std::max(m, n);
  for (int j = 1; j <= top; ++j) {
    power = gemm(power, a);
    if (j <= m) add_scaled(num, p[j], power);
    if (j <= n) add_scaled(den, q[j], power);
  }
  LuDecomposition<T> lu(den);
  const double cond = lu.condition_estimate();
  if (!(cond <= kMaxDenominatorCondition)) {
    throw Error(ErrorCode::SingularDenominator,
                "expm_pade: denominator condition estimate " + std::to_string(cond) +
                    " exceeds 1e12");
  }
  return lu.solve(num);
}

}  // namespace detail

/// sum_{k=0}^{terms} A^k / k!, with scaling and squaring above the threshold.
template <Scalar T>
Matrix<T> expm_taylor(const Matrix<T>& a, int terms, double scaling_threshold = 0.5) {
  require_square(a, "expm_taylor");
  require_finite(a, "expm_taylor");
  ExpmSpec::taylor(terms, scaling_threshold).validate();
  const int s = detail::scaling_exponent(norm1(a), scaling_threshold);
  auto x = detail::taylor_unscaled(detail::scaled_by_pow2(a, s), terms);
  return detail::square_repeatedly(std::move(x), s);
}

/// [m/n] Pade approximant Q(A)^-1 P(A), solved by LU rather than inverted,
/// with scaling and squaring above the threshold.
template <Scalar T>
Matrix<T> expm_pade(const Matrix<T>& a, int m, int n, double scaling_threshold = 0.5) {
  require_square(a, "expm_pade");
  require_finite(a, "expm_pade");
  ExpmSpec::pade(m, n, scaling_threshold).validate();
  const int s = detail::scaling_exponent(norm1(a), scaling_threshold);
  auto x = detail::pade_unscaled(detail::scaled_by_pow2(a, s), m, n);
  return detail::square_repeatedly(std::move(x), s);
}

template <Scalar T>
Matrix<T> expm(const Matrix<T>& a, const ExpmSpec& spec = {}) {
  spec.validate();
  if (spec.method == ExpmMethod::Taylor) {
    return expm_taylor(a, spec.taylor_terms, spec.scaling_threshold);
  }
  return expm_pade(a, spec.pade_m, spec.pade_n, spec.scaling_threshold);
}

}  // namespace tensorattn
