#include <array>
#include <cmath>
#include <limits>

#include "test_support.hpp"

using namespace tensorattn;
using tensorattn::testing::near;
using tensorattn::testing::throws_code;

namespace {

RealMatrix loop_product(const RealMatrix& a, const RealMatrix& b) {
  RealMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j)
      for (std::size_t k = 0; k < a.cols(); ++k) out(i, j) += a(i, k) * b(k, j);
  return out;
}

}  // namespace

TEST(Matrix, ConstructionValidatesLengthAndFiniteness) {
  EXPECT_TRUE(throws_code([] { RealMatrix(2, 2, {1.0, 2.0, 3.0}); }, ErrorCode::DimensionMismatch));
  EXPECT_TRUE(throws_code([] { RealMatrix(1, 1, {std::nan("")}); }, ErrorCode::NonFinite));
  EXPECT_TRUE(throws_code(
      [] { RealMatrix{{1.0, std::numeric_limits<double>::infinity()}}; }, ErrorCode::NonFinite));
  EXPECT_TRUE(throws_code([] { RealMatrix{{1.0, 2.0}, {3.0}}; }, ErrorCode::DimensionMismatch));
  const RealMatrix m(2, 3);
  EXPECT_EQ(m.size(), 6u);
  for (double x : m.data()) EXPECT_EQ(x, 0.0);
}

TEST(Gemm, IdentityTimesIdentity) {
  EXPECT_EQ(gemm(RealMatrix::identity(2), RealMatrix::identity(2)), RealMatrix::identity(2));
}

TEST(Gemm, RunningExampleProduct) {
  const RealMatrix q{{1, 0}, {1, 1}};
  const RealMatrix k{{1, 1}, {0, 1}};
  const RealMatrix expected{{1, 0}, {2, 1}};
  EXPECT_EQ(gemm(q, k, Op::None, Op::ConjTrans), expected);
  EXPECT_EQ(loop_product(q, transpose(k)), expected);
}

TEST(Gemm, ComplexConjugateTranspose) {
  const ComplexMatrix a{{complex128{0, 1}, 0}, {0, 1}};
  EXPECT_EQ(gemm(a, a, Op::None, Op::ConjTrans), ComplexMatrix::identity(2));
}

TEST(Gemm, AllTransposeFlagsMatchLoops) {
  Rng rng(3);
  const RealMatrix a = random_matrix(rng, 4, 3);
  const RealMatrix b = random_matrix(rng, 3, 5);
  const RealMatrix at = transpose(a);
  const RealMatrix bt = transpose(b);
  const RealMatrix ref = loop_product(a, b);
  EXPECT_TRUE(near(gemm(a, b), ref, 1e-14));
  EXPECT_TRUE(near(gemm(at, b, Op::ConjTrans, Op::None), ref, 1e-14));
  EXPECT_TRUE(near(gemm(a, bt, Op::None, Op::ConjTrans), ref, 1e-14));
  EXPECT_TRUE(near(gemm(at, bt, Op::ConjTrans, Op::ConjTrans), ref, 1e-14));
}

TEST(Gemm, LargeShapesMatchLoops) {
  Rng rng(11);
  for (const auto& [m, k, n] : {std::array<std::size_t, 3>{256, 256, 256}, {300, 40, 270}, {1024, 32, 512}}) {
    const RealMatrix a = random_matrix(rng, m, k);
    const RealMatrix b = random_matrix(rng, k, n);
    const RealMatrix ref = loop_product(a, b);
    const double tol = 1e-14 * static_cast<double>(k);
    EXPECT_TRUE(near(gemm(a, b), ref, tol)) << m << "x" << k << "x" << n;
    EXPECT_TRUE(near(gemm(transpose(a), transpose(b), Op::ConjTrans, Op::ConjTrans), ref, tol));
    EXPECT_TRUE(near(gemm(to_complex(a), to_complex(b)), to_complex(ref), tol));
  }
}

TEST(Herk, LargeShapesMatchLoops) {
  Rng rng(12);
  const RealMatrix a = random_matrix(rng, 300, 260);
  const RealMatrix ref = loop_product(a, transpose(a));
  EXPECT_TRUE(near(herk(a), ref, 1e-11));
  EXPECT_TRUE(near(herk(transpose(a), Op::ConjTrans), ref, 1e-11));
  EXPECT_TRUE(near(herk(to_complex(a)), to_complex(ref), 1e-11));
}

TEST(Gemm, ReportsBothShapesOnMismatch) {
  try {
    gemm(RealMatrix(2, 3), RealMatrix(2, 3));
    FAIL() << "expected DimensionMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
    EXPECT_NE(std::string(e.what()).find("2x3"), std::string::npos);
  }
}

TEST(Herk, MatchesGemmAndIsExactlyHermitian) {
  Rng rng(5);
  const ComplexMatrix a = random_complex_matrix(rng, 6, 4);
  const ComplexMatrix aah = herk(a, Op::None);
  const ComplexMatrix aha = herk(a, Op::ConjTrans);
  EXPECT_TRUE(near(aah, gemm(a, a, Op::None, Op::ConjTrans), 1e-13));
  EXPECT_TRUE(near(aha, gemm(a, a, Op::ConjTrans, Op::None), 1e-13));
  EXPECT_EQ(hermitian_defect(aah), 0.0);
  EXPECT_EQ(hermitian_defect(aha), 0.0);
}

TEST(Hadamard, Examples) {
  EXPECT_EQ(hadamard(RealMatrix::identity(2), RealMatrix::identity(2)), RealMatrix::identity(2));
  EXPECT_EQ(hadamard(RealMatrix{{1, 0}, {2, 1}}, RealMatrix{{1, 2}, {0, 1}}), RealMatrix::identity(2));
  Rng rng(1);
  const RealMatrix a = random_matrix(rng, 3, 4);
  EXPECT_EQ(hadamard(a, RealMatrix(3, 4)), RealMatrix(3, 4));
  EXPECT_TRUE(throws_code([&] { hadamard(a, RealMatrix(4, 3)); }, ErrorCode::DimensionMismatch));
}

TEST(Trace, Examples) {
  EXPECT_EQ(trace(RealMatrix::identity(3)), 3.0);
  EXPECT_EQ(trace(RealMatrix{{1, 2}, {2, 5}}), 6.0);
  EXPECT_EQ(trace(RealMatrix(4, 4)), 0.0);
  EXPECT_TRUE(throws_code([] { trace(RealMatrix(2, 3)); }, ErrorCode::NotSquare));
}

TEST(Trace, CyclicAndHadamardForms) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const RealMatrix a = random_matrix(rng, 4, 6);
    const RealMatrix b = random_matrix(rng, 6, 4);
    const double ab = trace(gemm(a, b));
    EXPECT_NEAR(ab, trace(gemm(b, a)), 1e-12 * std::max(1.0, std::abs(ab)));

    const RealMatrix s = random_matrix(rng, 5, 5);
    const RealMatrix t = random_matrix(rng, 5, 5);
    const double st = trace(gemm(s, t));
    EXPECT_NEAR(st, sum(hadamard(s, transpose(t))), 1e-12 * std::max(1.0, std::abs(st)));
  }
}

TEST(Trace, FrobeniusIsRealNonNegative) {
  Rng rng(9);
  const ComplexMatrix a = random_complex_matrix(rng, 4, 3);
  const complex128 t = trace(gemm(a, a, Op::None, Op::ConjTrans));
  double fro = 0.0;
  for (auto x : a.data()) fro += std::norm(x);
  EXPECT_NEAR(t.real(), fro, 1e-12 * fro);
  EXPECT_NEAR(t.imag(), 0.0, 1e-12 * fro);
  EXPECT_GE(t.real(), 0.0);
}

TEST(Kron, Examples) {
  EXPECT_EQ(kron(RealMatrix::identity(2), RealMatrix::identity(2)), RealMatrix::identity(4));
  EXPECT_EQ(kron(RealMatrix{{1, 2}}, RealMatrix{{3}, {4}}), (RealMatrix{{3, 6}, {4, 8}}));
  Rng rng(2);
  const RealMatrix a = random_matrix(rng, 3, 2);
  EXPECT_EQ(kron(a, RealMatrix{{1}}), a);
}

TEST(Vectorize, ColumnStacking) {
  EXPECT_EQ(vectorize(RealMatrix{{1, 2}, {3, 4}}), RealMatrix::column({1, 3, 2, 4}));
  const RealMatrix col = RealMatrix::column({5, 6, 7});
  EXPECT_EQ(vectorize(col), col);
  EXPECT_EQ(vectorize(RealMatrix{{7}}), RealMatrix{{7}});
}

TEST(PartialTrace, KroneckerExamples) {
  const RealMatrix a{{1, 2}, {3, 4}};
  const RealMatrix b{{5, 6}, {7, 8}};
  const RealMatrix ab = kron(a, b);
  EXPECT_EQ(partial_trace(ab, {2, 2, TracedSide::TraceOutW}), (RealMatrix{{13, 26}, {39, 52}}));
  EXPECT_EQ(partial_trace(ab, {2, 2, TracedSide::TraceOutV}), (RealMatrix{{25, 30}, {35, 40}}));
  EXPECT_EQ(partial_trace(RealMatrix::identity(4), {2, 2, TracedSide::TraceOutW}), 2.0 * RealMatrix::identity(2));
}

TEST(PartialTrace, RectangularFactorsAndTracePreservation) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const RealMatrix a = random_matrix(rng, 2, 2);
    const RealMatrix b = random_matrix(rng, 3, 3);
    const RealMatrix ab = kron(a, b);
    EXPECT_TRUE(near(partial_trace(ab, {2, 3, TracedSide::TraceOutW}), trace(b) * a, 1e-12));
    EXPECT_TRUE(near(partial_trace(ab, {2, 3, TracedSide::TraceOutV}), trace(a) * b, 1e-12));

    const RealMatrix t = random_matrix(rng, 6, 6);
    EXPECT_NEAR(trace(partial_trace(t, {2, 3, TracedSide::TraceOutW})), trace(t), 1e-12);
    EXPECT_NEAR(trace(partial_trace(t, {2, 3, TracedSide::TraceOutV})), trace(t), 1e-12);
  }
}

TEST(PartialTrace, RejectsWrongOperandSize) {
  EXPECT_TRUE(throws_code([] { partial_trace(RealMatrix(5, 5), {2, 2, TracedSide::TraceOutW}); },
                          ErrorCode::DimensionMismatch));
}

TEST(Norms, OneNormAndHelpers) {
  const RealMatrix a{{1, -2}, {-3, 4}};
  EXPECT_EQ(norm1(a), 6.0);
  EXPECT_EQ(max_abs(a), 4.0);
  EXPECT_EQ(frobenius_norm2(a), 30.0);
  EXPECT_EQ(tril(RealMatrix{{1, 2}, {3, 4}}), (RealMatrix{{1, 0}, {3, 4}}));
}
