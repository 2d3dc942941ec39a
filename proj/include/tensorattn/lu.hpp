#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "tensorattn/dense.hpp"

namespace tensorattn {

/// PA = LU with partial (row) pivoting. L is unit lower triangular and shares
/// storage with U.
template <Scalar T>
class LuDecomposition {
 public:
  explicit LuDecomposition(Matrix<T> a) : lu_(std::move(a)) {
    require_square(lu_, "LuDecomposition");
    require_finite(lu_, "LuDecomposition");
    const std::size_t n = lu_.rows();
    anorm1_ = norm1(lu_);
    perm_.resize(n);
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;

    for (std::size_t k = 0; k < n; ++k) {
      std::size_t p = k;
      double best = std::abs(lu_(k, k));
      for (std::size_t i = k + 1; i < n; ++i) {
        if (std::abs(lu_(i, k)) > best) {
          best = std::abs(lu_(i, k));
          p = i;
        }
      }
      if (best == 0.0) {
        singular_ = true;
        continue;
      }
      if (p != k) {
        for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
        std::swap(perm_[k], perm_[p]);
      }
      const T pivot = lu_(k, k);
      for (std::size_t i = k + 1; i < n; ++i) {
        const T factor = lu_(i, k) / pivot;
        lu_(i, k) = factor;
        if (factor == T{}) continue;
        for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= factor * lu_(k, j);
      }
    }
  }

  std::size_t size() const noexcept { return lu_.rows(); }

  /// True when an exactly zero pivot was met.
  bool singular() const noexcept { return singular_; }

  /// Solves A x = b.
  std::vector<T> solve(const std::vector<T>& b) const {
    require_nonsingular();
    const std::size_t n = size();
    std::vector<T> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
    }
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu_(i, j) * x[j];
      x[i] /= lu_(i, i);
    }
    return x;
  }

  /// Solves A^H x = b.
  std::vector<T> solve_adjoint(const std::vector<T>& b) const {
    require_nonsingular();
    const std::size_t n = size();
    // U^H w = b (forward), then L^H z = w (backward), then x = P^T z.
    std::vector<T> w = b;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < i; ++j) w[i] -= conj(lu_(j, i)) * w[j];
      w[i] /= conj(lu_(i, i));
    }
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t j = i + 1; j < n; ++j) w[i] -= conj(lu_(j, i)) * w[j];
    }
    std::vector<T> x(n);
    for (std::size_t i = 0; i < n; ++i) x[perm_[i]] = w[i];
    return x;
  }

  /// Solves A X = B column by column.
  Matrix<T> solve(const Matrix<T>& b) const {
    if (b.rows() != size()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "LuDecomposition::solve: rhs is " + shape_of(b) + " for order " +
                      std::to_string(size()));
    }
    Matrix<T> x(b.rows(), b.cols());
    std::vector<T> col(b.rows());
    for (std::size_t j = 0; j < b.cols(); ++j) {
      for (std::size_t i = 0; i < b.rows(); ++i) col[i] = b(i, j);
      const auto sol = solve(col);
      for (std::size_t i = 0; i < b.rows(); ++i) x(i, j) = sol[i];
    }
    return x;
  }

  /// Estimate of the 1-norm condition number ||A||_1 ||A^-1||_1 using
  /// Hager's method with Higham's extra test vector. Infinite if singular.
  double condition_estimate() const {
    if (singular_) return std::numeric_limits<double>::infinity();
    const std::size_t n = size();
    if (n == 0) return 0.0;

    auto norm1_vec = [](const std::vector<T>& v) {
      double s = 0.0;
      for (T x : v) s += std::abs(x);
      return s;
    };

    std::vector<T> x(n, T{1.0 / static_cast<double>(n)});
    double est = 0.0;
    for (int iter = 0; iter < 5; ++iter) {
      const auto y = solve(x);
      const double next = norm1_vec(y);
      if (iter > 0 && next <= est) break;
      est = next;
      std::vector<T> xi(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double mag = std::abs(y[i]);
        xi[i] = mag == 0.0 ? T{1} : y[i] / mag;
      }
      const auto z = solve_adjoint(xi);
      std::size_t jmax = 0;
      double zmax = 0.0;
      T ztx{};
      for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(z[i]) > zmax) {
          zmax = std::abs(z[i]);
          jmax = i;
        }
        ztx += conj(z[i]) * x[i];
      }
      if (iter > 0 && zmax <= real_part(ztx)) break;
      std::fill(x.begin(), x.end(), T{});
      x[jmax] = T{1};
    }

    std::vector<T> alt(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double sign = (i % 2 == 0) ? 1.0 : -1.0;
      const double ramp = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
      alt[i] = T{sign * (1.0 + ramp)};
    }
    est = std::max(est, 2.0 * norm1_vec(solve(alt)) / (3.0 * static_cast<double>(n)));
    return anorm1_ * est;
  }

 private:
  void require_nonsingular() const {
    if (singular_) throw Error(ErrorCode::SingularDenominator, "LuDecomposition: zero pivot");
  }

  Matrix<T> lu_;
  std::vector<std::size_t> perm_;
  double anorm1_ = 0.0;
  bool singular_ = false;
};

}  // namespace tensorattn
