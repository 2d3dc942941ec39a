#pragma once

#include <functional>
#include <string>
#include <utility>

#include "tensorattn/dense.hpp"

namespace tensorattn {

/// Validated (Q, K, V) triple: Q and K are n x d, V is n x d_v, all finite,
/// n, d, d_v >= 1.
template <Scalar T>
class AttnInputs {
 public:
  AttnInputs(Matrix<T> q, Matrix<T> k, Matrix<T> v)
      : q_(std::move(q)), k_(std::move(k)), v_(std::move(v)) {
    if (q_.rows() != k_.rows() || q_.cols() != k_.cols()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "AttnInputs: Q is " + shape_of(q_) + " but K is " + shape_of(k_));
    }
    if (v_.rows() != q_.rows()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "AttnInputs: V is " + shape_of(v_) + " for n=" + std::to_string(q_.rows()));
    }
    if (q_.rows() == 0 || q_.cols() == 0 || v_.cols() == 0) {
      throw Error(ErrorCode::DimensionMismatch, "AttnInputs: n, d and d_v must be >= 1");
    }
    require_finite(q_, "AttnInputs Q");
    require_finite(k_, "AttnInputs K");
    require_finite(v_, "AttnInputs V");
  }

  const Matrix<T>& q() const noexcept { return q_; }
  const Matrix<T>& k() const noexcept { return k_; }
  const Matrix<T>& v() const noexcept { return v_; }

  std::size_t n() const noexcept { return q_.rows(); }
  std::size_t d() const noexcept { return q_.cols(); }
  std::size_t dv() const noexcept { return v_.cols(); }

 private:
  Matrix<T> q_;
  Matrix<T> k_;
  Matrix<T> v_;
};

using RealAttnInputs = AttnInputs<double>;
using ComplexAttnInputs = AttnInputs<complex128>;

/// Any attention operation: maps validated inputs to an n x d_v output.
using MechanismFn = std::function<RealMatrix(const RealAttnInputs&)>;

}  // namespace tensorattn
