#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "tlaw/numerics.hpp"

using namespace tlaw;

namespace {

// Independent oracle: bisection on erfc, in whichever tail keeps full precision.
double bisect_quantile(double p) {
    const bool upper = p > 0.5;
    const double tail = upper ? 1.0 - p : p;  // exact for p >= 0.5
    double lo = -40.0, hi = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (0.5 * std::erfc(-mid / std::numbers::sqrt2) < tail ? lo : hi) = mid;
    }
    const double x = 0.5 * (lo + hi);
    return upper ? -x : x;
}

} // namespace

TEST(NormalQuantile, SpecValues) {
    EXPECT_EQ(normal_quantile(0.5), 0.0);
    EXPECT_NEAR(normal_quantile(0.975), 1.959963985, 1e-8);
    EXPECT_NEAR(normal_quantile(0.995), 2.575829304, 1e-8);
}

TEST(NormalQuantile, MatchesBisectionOracle) {
    for (double p : {1e-12, 1e-6, 0.001, 0.02, 0.02425, 0.1, 0.3, 0.6, 0.9, 0.97575, 0.999, 1 - 1e-9})
        EXPECT_NEAR(normal_quantile(p), bisect_quantile(p), 1e-9 * std::max(1.0, std::fabs(bisect_quantile(p))))
            << p;
}

TEST(NormalQuantile, Symmetry) {
    for (double p = 0.001; p < 0.5; p += 0.0173)
        EXPECT_DOUBLE_EQ(normal_quantile(p), -normal_quantile(1.0 - p));
}

TEST(NormalQuantile, RejectsOutsideUnitInterval) {
    for (double p : {0.0, 1.0, -0.1, 1.5, std::nan("")})
        EXPECT_THROW(normal_quantile(p), Error);
}

TEST(StudentT, ApproachesNormalForLargeDof) {
    EXPECT_NEAR(student_t_quantile(0.975, 1e7), normal_quantile(0.975), 1e-6);
    EXPECT_NEAR(student_t_quantile(0.975, 10), 2.228138852, 1e-8);
}

TEST(InvSqrt, Identity) {
    const auto r = sym2x2_inv_sqrt(SymMatrix2::identity());
    EXPECT_NEAR(r.a11, 1.0, 1e-15);
    EXPECT_NEAR(r.a12, 0.0, 1e-15);
    EXPECT_NEAR(r.a22, 1.0, 1e-15);
}

TEST(InvSqrt, Diagonal) {
    const auto r = sym2x2_inv_sqrt({4.0, 0.0, 9.0});
    EXPECT_NEAR(r.a11, 0.5, 1e-15);
    EXPECT_NEAR(r.a12, 0.0, 1e-15);
    EXPECT_NEAR(r.a22, 1.0 / 3.0, 1e-15);
}

TEST(InvSqrt, OffDiagonalOracle) {
    // [[2,1],[1,2]] has eigenvalues 1 (v=(1,-1)/√2) and 3 (v=(1,1)/√2).
    const auto r = sym2x2_inv_sqrt({2.0, 1.0, 2.0});
    const double a = 1.0, b = 1.0 / std::sqrt(3.0);
    EXPECT_NEAR(r.a11, 0.5 * (a + b), 1e-14);
    EXPECT_NEAR(r.a12, 0.5 * (b - a), 1e-14);
    EXPECT_NEAR(r.a22, 0.5 * (a + b), 1e-14);
}

TEST(InvSqrt, SquaresToInverse) {
    for (const SymMatrix2 m : {SymMatrix2{3.0, -1.2, 0.7}, SymMatrix2{1e-3, 2e-4, 5e-3},
                               SymMatrix2{100.0, 99.0, 100.0}}) {
        const auto c = sym2x2_inv_sqrt(m);
        const auto p = congruence(c.full(), m);  // C M C' = I
        EXPECT_NEAR(p.a11, 1.0, 1e-10);
        EXPECT_NEAR(p.a12, 0.0, 1e-10);
        EXPECT_NEAR(p.a22, 1.0, 1e-10);
    }
}

TEST(InvSqrt, SingularThrowsWithEigenvalue) {
    try {
        sym2x2_inv_sqrt({1.0, 1.0, 1.0});
        FAIL();
    } catch (const SingularMatrixError& e) {
        EXPECT_EQ(e.code(), ErrorCode::singular_gamma);
        EXPECT_NEAR(e.min_eigenvalue(), 0.0, 1e-15);
    }
    EXPECT_THROW(sym2x2_inv_sqrt({-1.0, 0.0, 1.0}), SingularMatrixError);
}

TEST(Eigen, MinEigenvalue) {
    EXPECT_DOUBLE_EQ(min_eigenvalue(SymMatrix2::identity()), 1.0);
    EXPECT_DOUBLE_EQ(min_eigenvalue({2.0, 0.0, 5.0}), 2.0);
    EXPECT_NEAR(min_eigenvalue({2.0, 1.0, 2.0}), 1.0, 1e-15);
}

TEST(FisherCi, SpecExample) {
    const auto ci = fisher_ci(0.0, 28, 0.05);
    EXPECT_NEAR(ci.lower, -std::tanh(normal_quantile(0.975) / 5.0), 1e-14);
    // The quoted value is tanh(0.392) = 0.37308 rounded loosely.
    EXPECT_NEAR(ci.upper, 0.3735, 5e-4);
    EXPECT_DOUBLE_EQ(ci.lower, -ci.upper);
}

TEST(FisherCi, SymmetricAtZeroAndContainsR) {
    for (long n : {4L, 10L, 1000L}) {
        const auto ci = fisher_ci(0.0, n, 0.1);
        EXPECT_DOUBLE_EQ(ci.lower, -ci.upper);
    }
    for (double r : {-0.9, -0.3, 0.2, 0.95}) EXPECT_TRUE(fisher_ci(r, 30, 0.05).contains(r));
}

TEST(FisherCi, Errors) {
    EXPECT_THROW(fisher_ci(1.0, 30, 0.05), Error);
    EXPECT_THROW(fisher_ci(-1.0, 30, 0.05), Error);
    EXPECT_THROW(fisher_ci(0.0, 3, 0.05), Error);
    EXPECT_THROW(fisher_ci(0.0, 30, 0.0), Error);
}
