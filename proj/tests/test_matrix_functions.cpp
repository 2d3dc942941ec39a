#include <cmath>
#include <limits>

#include "test_support.hpp"

using namespace tensorattn;
using tensorattn::testing::near;
using tensorattn::testing::throws_code;

namespace {

constexpr double kNoScaling = std::numeric_limits<double>::infinity();

RealMatrix random_with_norm(Rng& rng, std::size_t n, double target) {
  RealMatrix a = random_matrix(rng, n, n);
  return (target / norm1(a)) * a;
}

double det(const RealMatrix& a) {
  if (a.rows() == 2) return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

}  // namespace

TEST(PadeCoefficients, TwoTwoMatchesTaylor) {
  const auto [p, q] = pade_exp_coefficients(2, 2);
  ASSERT_EQ(p.size(), 3u);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
  EXPECT_DOUBLE_EQ(p[2], 1.0 / 12.0);
  EXPECT_DOUBLE_EQ(q[1], -0.5);
  EXPECT_DOUBLE_EQ(q[2], 1.0 / 12.0);
}

TEST(Expm, ZeroGivesIdentity) {
  EXPECT_EQ(expm_taylor(RealMatrix(3, 3), 10), RealMatrix::identity(3));
  EXPECT_EQ(expm_pade(RealMatrix(3, 3), 6, 6), RealMatrix::identity(3));
}

TEST(Expm, DiagonalTaylor) {
  const RealMatrix a{{1, 0}, {0, 2}};
  EXPECT_TRUE(near(expm_taylor(a, 30), RealMatrix{{std::exp(1.0), 0}, {0, std::exp(2.0)}}, 1e-12 * std::exp(2.0)));
}

TEST(Expm, NilpotentIsExact) {
  const RealMatrix a{{0, 1}, {0, 0}};
  const RealMatrix expected{{1, 1}, {0, 1}};
  EXPECT_EQ(expm_taylor(a, 2), expected);
  EXPECT_EQ(expm_taylor(a, 30), expected);
  EXPECT_EQ(expm_pade(a, 6, 6), expected);
}

TEST(Expm, ScalarPadeTwoTwo) {
  // The bare [2/2] approximant; scaling and squaring would move it toward e.
  EXPECT_NEAR(expm_pade(RealMatrix{{1.0}}, 2, 2, kNoScaling)(0, 0), 19.0 / 7.0, 1e-12);
  EXPECT_GT(std::abs(19.0 / 7.0 - std::exp(1.0)), 1e-3);
}

TEST(Expm, TaylorAndPadeAgree) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const RealMatrix a = random_with_norm(rng, 3 + seed % 4, rng.uniform(0.05, 1.0));
    EXPECT_TRUE(near(expm_pade(a, 6, 6), expm_taylor(a, 30), 1e-10));
  }
}

TEST(Expm, InverseTransposeAndDeterminant) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed + 100);
    const std::size_t n = 2 + seed % 2;
    const RealMatrix a = random_with_norm(rng, n, rng.uniform(0.1, 1.0));
    const RealMatrix e = expm(a);
    EXPECT_TRUE(near(gemm(e, expm(-1.0 * a)), RealMatrix::identity(n), 1e-8));
    EXPECT_TRUE(near(expm(transpose(a)), transpose(e), 1e-10));
    const double expected = std::exp(trace(a));
    EXPECT_NEAR(det(e), expected, 1e-8 * expected);
  }
}

TEST(Expm, LargeNormUsesScalingAndSquaring) {
  const RealMatrix a{{0, 6}, {-6, 0}};  // rotation by 6 radians
  const RealMatrix expected{{std::cos(6.0), std::sin(6.0)}, {-std::sin(6.0), std::cos(6.0)}};
  EXPECT_TRUE(near(expm_pade(a, 6, 6), expected, 1e-12));
  EXPECT_TRUE(near(expm_taylor(a, 30), expected, 1e-12));
}

TEST(Expm, ComplexHermitianGivesUnitaryPhase) {
  const ComplexMatrix a{{complex128{0, 1}, 0}, {0, complex128{0, -1}}};
  const ComplexMatrix e = expm(a);
  EXPECT_NEAR(std::abs(e(0, 0) - std::polar(1.0, 1.0)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(e(1, 1) - std::polar(1.0, -1.0)), 0.0, 1e-14);
}

TEST(Expm, Errors) {
  EXPECT_TRUE(throws_code([] { expm_taylor(RealMatrix(2, 3), 5); }, ErrorCode::NotSquare));
  EXPECT_TRUE(throws_code([] { expm_pade(RealMatrix(3, 2), 6, 6); }, ErrorCode::NotSquare));
  EXPECT_TRUE(throws_code([] { expm_taylor(RealMatrix(2, 2), 0); }, ErrorCode::InvalidArgument));
  EXPECT_TRUE(throws_code([] { expm(RealMatrix(2, 2), ExpmSpec::pade(6, 6, 0.0)); }, ErrorCode::InvalidArgument));
  // [1/1] denominator I - A/2 is singular at A = 2I.
  EXPECT_TRUE(throws_code([] { expm_pade(2.0 * RealMatrix::identity(2), 1, 1, kNoScaling); },
                          ErrorCode::SingularDenominator));
}

TEST(Lu, SolvesAndEstimatesCondition) {
  const RealMatrix a{{4, 1}, {2, 3}};
  LuDecomposition<double> lu(a);
  const auto x = lu.solve(std::vector<double>{1, 2});
  EXPECT_NEAR(4 * x[0] + x[1], 1.0, 1e-14);
  EXPECT_NEAR(2 * x[0] + 3 * x[1], 2.0, 1e-14);
  // ||A||_1 = 6, ||A^-1||_1 = 0.5
  EXPECT_NEAR(lu.condition_estimate(), 3.0, 1e-12);

  const RealMatrix near_singular{{1, 1}, {1, 1 + 1e-14}};
  EXPECT_GT(LuDecomposition<double>(near_singular).condition_estimate(), 1e12);
  EXPECT_TRUE(LuDecomposition<double>(RealMatrix{{1, 2}, {2, 4}}).singular());
}
