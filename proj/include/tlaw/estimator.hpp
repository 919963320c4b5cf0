#pragma once

// Log-log ordinary least-squares fit of variance = alpha * mean^beta.
//
// The fit regresses log(var_hat_t) on log(mu_hat_t) over the times of a
// panel. theta = (log alpha, beta) solves D * theta = N, where
//
//     D = [[1, mean(lm)], [mean(lm), mean(lm^2)]],  N = (mean(lv), mean(lm*lv))
//
// with lm_t = log(mu_hat_t) and lv_t = log(var_hat_t). A zero sample mean or
// variance contributes a log of 0 (the "zero convention"); the drop mode
// instead removes such times and averages over the remaining ones.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tlaw/error.hpp"
#include "tlaw/numerics.hpp"
#include "tlaw/panel.hpp"

namespace tlaw {

enum class DegenerateTimes { keep, drop };

inline const char* to_string(DegenerateTimes m) {
    return m == DegenerateTimes::keep ? "keep" : "drop";
}

// Determinant floor for D below which the design is considered degenerate.
inline constexpr double design_floor = 1e-10;

struct DesignMatrices {
    SymMatrix2 D = SymMatrix2::identity();
    Vec2 N{};
    int T_total = 0;
    int T_used = 0;  // number of times in the averages (== T_total in keep mode)
    int zero_mean_count = 0;
    int zero_var_count = 0;
};

struct FitOptions {
    VarianceMode variance = VarianceMode::biased;
    RescaleMode rescale = RescaleMode::none;
    DegenerateTimes degenerate = DegenerateTimes::keep;
};

struct TLFit {
    double theta1 = 0.0;  // log alpha
    double theta2 = 0.0;  // beta
    double alpha_hat = 1.0;
    DesignMatrices design;
    VarianceMode variance_mode = VarianceMode::biased;
    DegenerateTimes degenerate_mode = DegenerateTimes::keep;

    Vec2 theta() const { return {theta1, theta2}; }
};

// One regression point: (log mean, log variance) with the zero convention
// applied.
struct LogPoint {
    double log_mean = 0.0;
    double log_var = 0.0;
};

inline bool usable(const MomentSummary& s) { return s.mean_positive && s.var_positive; }

inline std::vector<LogPoint> regression_points(std::span<const MomentSummary> summaries,
                                               DegenerateTimes mode = DegenerateTimes::keep) {
    std::vector<LogPoint> pts;
    pts.reserve(summaries.size());
    for (const auto& s : summaries) {
        if (mode == DegenerateTimes::drop && !usable(s)) continue;
        pts.push_back({s.mean_positive ? std::log(s.mu_hat) : 0.0,
                       s.var_positive ? std::log(s.var_hat) : 0.0});
    }
    return pts;
}

inline DesignMatrices design_matrices(std::span<const MomentSummary> summaries,
                                      DegenerateTimes mode = DegenerateTimes::keep) {
    DesignMatrices dm;
    dm.T_total = static_cast<int>(summaries.size());
    for (const auto& s : summaries) {
        if (!s.mean_positive) ++dm.zero_mean_count;
        if (!s.var_positive) ++dm.zero_var_count;
    }
    const auto pts = regression_points(summaries, mode);
    dm.T_used = static_cast<int>(pts.size());
    if (pts.empty()) {
        dm.D = {1.0, 0.0, 0.0};
        return dm;
    }
    double sx = 0.0, sxx = 0.0, sy = 0.0, sxy = 0.0;
    for (const auto& p : pts) {
        sx += p.log_mean;
        sxx += p.log_mean * p.log_mean;
        sy += p.log_var;
        sxy += p.log_mean * p.log_var;
    }
    const double inv_t = 1.0 / static_cast<double>(pts.size());
    dm.D = {1.0, sx * inv_t, sxx * inv_t};
    dm.N = {sy * inv_t, sxy * inv_t};
    return dm;
}

// theta = D^{-1} N by the closed-form 2x2 inverse.
inline TLFit fit_from_design(const DesignMatrices& dm) {
    const double det = dm.D.det();
    if (!(det >= design_floor))
        throw Error(ErrorCode::degenerate_design,
                    "degenerate design: det(D) = " + std::to_string(det) +
                        " (log sample means do not vary enough over time)");
    TLFit fit;
    fit.design = dm;
    fit.theta1 = (dm.D.a22 * dm.N[0] - dm.D.a12 * dm.N[1]) / det;
    fit.theta2 = (dm.D.a11 * dm.N[1] - dm.D.a12 * dm.N[0]) / det;
    fit.alpha_hat = std::exp(fit.theta1);
    return fit;
}

inline TLFit fit_summaries(std::span<const MomentSummary> summaries,
                           VarianceMode variance = VarianceMode::biased,
                           DegenerateTimes mode = DegenerateTimes::keep) {
    if (summaries.size() < 2)
        throw Error(ErrorCode::domain, "fit needs at least two times");
    TLFit fit = fit_from_design(design_matrices(summaries, mode));
    fit.variance_mode = variance;
    fit.degenerate_mode = mode;
    return fit;
}

inline TLFit fit_tl(const Panel& panel, const FitOptions& opts = {}) {
    const Panel p = rescale_panel(panel, opts.rescale);
    const auto summaries = column_moments(p, opts.variance);
    return fit_summaries(summaries, opts.variance, opts.degenerate);
}

// Textbook simple-linear-regression intervals for the intercept and slope of
// log variance on log mean, Student-t with T - 2 degrees of freedom.
struct ConventionalCi {
    Interval intercept;
    Interval slope;
    double rss = 0.0;
    double slope_se = 0.0;
    double intercept_se = 0.0;
    int dof = 0;
    bool degenerate = false;  // zero residual sum of squares
};

inline ConventionalCi conventional_ci(std::span<const MomentSummary> summaries, const TLFit& fit,
                                      double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw Error(ErrorCode::domain, "conventional_ci: alpha must lie in (0,1)");
    const auto pts = regression_points(summaries, fit.degenerate_mode);
    const std::size_t t = pts.size();
    if (t < 3)
        throw Error(ErrorCode::domain, "conventional_ci: needs at least 3 regression points");

    double xbar = 0.0, ybar = 0.0;
    for (const auto& p : pts) {
        xbar += p.log_mean;
        ybar += p.log_var;
    }
    xbar /= static_cast<double>(t);
    ybar /= static_cast<double>(t);

    double sxx = 0.0, syy = 0.0, rss = 0.0;
    for (const auto& p : pts) {
        sxx += (p.log_mean - xbar) * (p.log_mean - xbar);
        syy += (p.log_var - ybar) * (p.log_var - ybar);
        const double r = p.log_var - fit.theta1 - fit.theta2 * p.log_mean;
        rss += r * r;
    }

    ConventionalCi ci;
    ci.dof = static_cast<int>(t) - 2;
    ci.rss = rss;
    // RSS at rounding level of the response spread counts as an exact fit.
    ci.degenerate = rss <= 1e-24 * std::max(1.0, syy);
    const double s2 = ci.degenerate ? 0.0 : rss / ci.dof;
    ci.slope_se = std::sqrt(s2 / sxx);
    ci.intercept_se = std::sqrt(s2 * (1.0 / static_cast<double>(t) + xbar * xbar / sxx));
    const double q = student_t_quantile(1.0 - alpha / 2.0, ci.dof);
    ci.intercept = {fit.theta1 - q * ci.intercept_se, fit.theta1 + q * ci.intercept_se};
    ci.slope = {fit.theta2 - q * ci.slope_se, fit.theta2 + q * ci.slope_se};
    return ci;
}

} // namespace tlaw
