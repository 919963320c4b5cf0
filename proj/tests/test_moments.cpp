#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "tlaw/panel.hpp"

using namespace tlaw;

TEST(ColumnSummary, ConstantColumn) {
    const std::vector<double> c{1, 1, 1, 1};
    const auto s = column_summary(c, VarianceMode::biased);
    EXPECT_EQ(s.mu_hat, 1.0);
    EXPECT_EQ(s.var_hat, 0.0);
    EXPECT_FALSE(s.var_positive);
    EXPECT_TRUE(s.mean_positive);
}

TEST(ColumnSummary, TwoPointBiasedAndUnbiased) {
    const std::vector<double> c{0, 1};
    const auto b = column_summary(c, VarianceMode::biased);
    EXPECT_DOUBLE_EQ(b.mu_hat, 0.5);
    EXPECT_DOUBLE_EQ(b.m2_hat, 0.5);
    EXPECT_DOUBLE_EQ(b.var_hat, 0.25);
    EXPECT_DOUBLE_EQ(column_summary(c, VarianceMode::unbiased).var_hat, 0.5);
}

TEST(ColumnSummary, AllZero) {
    const std::vector<double> c{0, 0, 0};
    const auto s = column_summary(c, VarianceMode::biased);
    EXPECT_FALSE(s.mean_positive);
    EXPECT_FALSE(s.var_positive);
}

TEST(ColumnSummary, LargeOffsetKeepsPrecision) {
    // Raw-moment cancellation would lose everything here.
    const std::vector<double> c{1e8, 1e8 + 1, 1e8 + 2};
    EXPECT_NEAR(column_summary(c, VarianceMode::biased).var_hat, 2.0 / 3.0, 1e-9);
}

TEST(Panel, Validation) {
    EXPECT_THROW(Panel(1, 3, {1, 2, 3}), Error);
    EXPECT_THROW(Panel(2, 2, {1, 2, 3}), Error);
    EXPECT_THROW(Panel(2, 2, {1, -2, 3, 4}), Error);
    EXPECT_THROW(Panel(2, 2, {1, std::nan(""), 3, 4}), Error);
    EXPECT_THROW(Panel::from_rows({{1, 2}, {3}}), Error);
}

TEST(Panel, ColumnMomentsLength) {
    const Panel p = Panel::from_rows({{1, 2, 3}, {4, 5, 6}});
    const auto m = column_moments(p, VarianceMode::biased);
    ASSERT_EQ(m.size(), 3u);
    EXPECT_DOUBLE_EQ(m[0].mu_hat, 2.5);
    EXPECT_DOUBLE_EQ(m[2].var_hat, 2.25);
}

TEST(Rescale, NoneIsIdentity) {
    const Panel p = Panel::from_rows({{1, 2}, {3, 4}});
    EXPECT_EQ(rescale_panel(p, RescaleMode::none), p);
}

TEST(Rescale, GrandMean) {
    const Panel p = Panel::from_rows({{1, 2}, {3, 4}});
    const Panel r = rescale_panel(p, RescaleMode::grand_mean);
    EXPECT_DOUBLE_EQ(r(0, 0), 1 / 2.5);
    EXPECT_DOUBLE_EQ(r(1, 1), 4 / 2.5);
    EXPECT_NEAR(grand_mean(r), 1.0, 1e-15);
    EXPECT_THROW(rescale_panel(Panel::from_rows({{0, 0}, {0, 0}}), RescaleMode::grand_mean), Error);
}

TEST(Transpose, InvolutionAndShape) {
    const Panel p = Panel::from_rows({{0, 1, 2}, {3, 4, 5}}, {"a", "b"}, {"t1", "t2", "t3"});
    const Panel q = transpose_axis(p);
    ASSERT_EQ(q.n_sites(), 3u);
    ASSERT_EQ(q.n_times(), 2u);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(q(i, j), p(j, i));
    EXPECT_EQ(q.site_labels()[2], "t3");
    EXPECT_EQ(transpose_axis(q), p);
}
