#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "tlaw/diagnostics.hpp"

using namespace tlaw;

namespace {

// Residual-like panel of iid standard normals shifted to be nonnegative.
Panel iid_panel(std::size_t n, std::size_t T, std::uint64_t seed) {
    std::vector<double> v(n * T);
    for (std::size_t k = 0; k < v.size(); ++k) {
        UniformStream s(seed, static_cast<std::uint32_t>(k), 0x1DD, 0);
        v[k] = 10.0 + draw_normal(s);
    }
    return Panel(n, T, std::move(v));
}

} // namespace

TEST(Residuals, StandardizationAndMasking) {
    const Panel p = Panel::from_rows({{0, 3, 1}, {2, 3, 5}, {4, 3, 0}});
    const auto r = residual_panel(p);
    EXPECT_TRUE(r.valid_times[0]);
    EXPECT_FALSE(r.valid_times[1]);
    EXPECT_TRUE(r.valid_times[2]);
    for (std::size_t t : {0u, 2u}) {
        double m = 0, v = 0;
        for (std::size_t j = 0; j < 3; ++j) m += r(j, t);
        for (std::size_t j = 0; j < 3; ++j) v += r(j, t) * r(j, t);
        EXPECT_NEAR(m / 3, 0.0, 1e-12);
        EXPECT_NEAR(v / 3, 1.0, 1e-12);
    }
}

TEST(Residuals, TwoPointColumn) {
    const Panel p = Panel::from_rows({{0, 1}, {2, 3}});
    const auto r = residual_panel(p);
    EXPECT_DOUBLE_EQ(r(0, 0), -1.0);
    EXPECT_DOUBLE_EQ(r(1, 0), 1.0);
}

TEST(Residuals, AllConstantThrows) {
    try {
        residual_panel(Panel::from_rows({{1, 2}, {1, 2}}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::invalid_residuals);
    }
}

TEST(Temporal, IidCoverage) {
    const auto r = residual_panel(iid_panel(200, 40, 1));
    const auto rep = temporal_independence_report(r, 3, 0.05);
    ASSERT_EQ(rep.per_lag_coverage.size(), 3u);
    for (const auto& lc : rep.per_lag_coverage) {
        EXPECT_GE(lc.coverage, 88.0);
        EXPECT_LE(lc.coverage, 100.0);
        EXPECT_EQ(lc.tested, 200);
    }
}

TEST(Temporal, TooFewTimes) {
    const auto r = residual_panel(iid_panel(10, 5, 1));
    EXPECT_THROW(temporal_independence_report(r, 3, 0.05), Error);
}

TEST(Temporal, AutocorrelationByHand) {
    const std::vector<double> z{1, -1, 1, -1};
    EXPECT_DOUBLE_EQ(autocorrelation(z, 1), -0.75);
    EXPECT_DOUBLE_EQ(autocorrelation(z, 2), 0.5);
}

TEST(Spatial, DuplicateSitesExcluded) {
    auto rows = std::vector<std::vector<double>>{{1, 5, 2, 7, 3, 9}, {1, 5, 2, 7, 3, 9},
                                                 {4, 1, 6, 2, 8, 0}};
    const auto r = residual_panel(Panel::from_rows(rows));
    const auto rep = spatial_independence_report(r, 0.05);
    EXPECT_EQ(rep.pairs_tested, 3);
    EXPECT_GE(rep.pairs_excluded, 1);
}

TEST(Spatial, SubsampleSizeAndDeterminism) {
    const auto r = residual_panel(iid_panel(195, 10, 2));
    const auto a = spatial_independence_report(r, 0.05, 10, 4);
    const auto b = spatial_independence_report(r, 0.05, 10, 4);
    EXPECT_EQ(a.pairs_tested, 10);
    EXPECT_EQ(a.spatial_coverage, b.spatial_coverage);
    EXPECT_EQ(spatial_independence_report(r, 0.05).pairs_tested, 195 * 194 / 2);
}

TEST(Spatial, IidCoverage) {
    const auto r = residual_panel(iid_panel(50, 40, 3));
    const auto rep = spatial_independence_report(r, 0.05);
    EXPECT_GE(rep.spatial_coverage, 88.0);
    EXPECT_LE(rep.spatial_coverage, 100.0);
}

TEST(Spatial, CoverageMonotoneInAlpha) {
    const auto r = residual_panel(iid_panel(40, 20, 5));
    double prev = 101;
    for (double alpha : {0.01, 0.05, 0.1, 0.2, 0.5}) {
        const double c = spatial_independence_report(r, alpha).spatial_coverage;
        EXPECT_LE(c, prev);
        prev = c;
    }
}

TEST(Pairs, DecodeAndSample) {
    std::size_t k = 0;
    for (std::size_t j = 0; j < 6; ++j)
        for (std::size_t l = j + 1; l < 6; ++l) EXPECT_EQ(detail::decode_pair(k++, 6), std::make_pair(j, l));
    const auto s = detail::sample_pairs(1000, 50, 1);
    EXPECT_EQ(s.size(), 50u);
    EXPECT_LT(s.back(), 1000u);
}
