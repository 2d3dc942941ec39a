#pragma once

// Dispatch for the dense-core products. Row-major throughout. Real gemm goes
// through Eigen: OpenBLAS 0.3.20's Cooperlake dgemm kernel returns wrong
// results once the output reaches a few hundred rows and columns.

#include <cblas.h>

#include <Eigen/Core>

#include <cstddef>

#include "tensorattn/scalar.hpp"

namespace tensorattn::detail {

inline CBLAS_TRANSPOSE to_cblas(bool conj_trans, bool is_complex) {
  if (!conj_trans) return CblasNoTrans;
  return is_complex ? CblasConjTrans : CblasTrans;
}

// C (m x n) = op(A) * op(B), k the inner dimension. lda/ldb are the stored
// column counts of A and B.
template <Scalar T>
void blas_gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
               const T* a, std::size_t lda, const T* b, std::size_t ldb, T* c) {
  const auto M = static_cast<int>(m);
  const auto N = static_cast<int>(n);
  const auto K = static_cast<int>(k);
  const auto LDA = static_cast<int>(lda);
  const auto LDB = static_cast<int>(ldb);
  const auto LDC = static_cast<int>(n);
  if constexpr (is_complex_v<T>) {
    const complex128 one{1.0, 0.0};
    const complex128 zero{0.0, 0.0};
    cblas_zgemm(CblasRowMajor, to_cblas(trans_a, true), to_cblas(trans_b, true), M, N, K, &one,
                a, LDA, b, LDB, &zero, c, LDC);
  } else {
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using Stride = Eigen::OuterStride<>;
    const Eigen::Map<const RowMajor, 0, Stride> ma(a, trans_a ? K : M, trans_a ? M : K, Stride(LDA));
    const Eigen::Map<const RowMajor, 0, Stride> mb(b, trans_b ? N : K, trans_b ? K : N, Stride(LDB));
    Eigen::Map<RowMajor, 0, Stride> mc(c, M, N, Stride(LDC));
    if (trans_a && trans_b) {
      mc.noalias() = ma.transpose() * mb.transpose();
    } else if (trans_a) {
      mc.noalias() = ma.transpose() * mb;
    } else if (trans_b) {
      mc.noalias() = ma * mb.transpose();
    } else {
      mc.noalias() = ma * mb;
    }
  }
}

// Upper triangle of C (n x n) = A A^H (trans=false, A is n x k) or
// A^H A (trans=true, A is k x n). The strict lower triangle is untouched.
template <Scalar T>
void blas_herk_upper(bool trans, std::size_t n, std::size_t k, const T* a, std::size_t lda, T* c) {
  const auto N = static_cast<int>(n);
  const auto K = static_cast<int>(k);
  const auto LDA = static_cast<int>(lda);
  const auto LDC = static_cast<int>(n);
  if constexpr (is_complex_v<T>) {
    cblas_zherk(CblasRowMajor, CblasUpper, trans ? CblasConjTrans : CblasNoTrans, N, K, 1.0, a,
                LDA, 0.0, c, LDC);
  } else {
    cblas_dsyrk(CblasRowMajor, CblasUpper, trans ? CblasTrans : CblasNoTrans, N, K, 1.0, a, LDA,
                0.0, c, LDC);
  }
}

}  // namespace tensorattn::detail
