#pragma once

// Residual-based independence checks. Each column is standardized by its
// sample mean and (biased) sample standard deviation; the sampling error of
// those two estimates is neglected. Temporal dependence is screened with the
// lag-h autocorrelation of every site's residual series, spatial dependence
// with the correlation between pairs of sites. Each coefficient gets a
// Fisher-z interval and the reports give the percentage of intervals that
// contain 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "tlaw/error.hpp"
#include "tlaw/numerics.hpp"
#include "tlaw/panel.hpp"
#include "tlaw/random.hpp"

namespace tlaw {

struct ResidualPanel {
    std::size_t n = 0;
    std::size_t T = 0;
    std::vector<double> values;    // time-major: values[t * n + j]
    std::vector<bool> valid_times;

    double operator()(std::size_t site, std::size_t time) const { return values[time * n + site]; }

    std::size_t valid_count() const {
        return static_cast<std::size_t>(std::count(valid_times.begin(), valid_times.end(), true));
    }

    // Residual series of one site restricted to the valid times.
    std::vector<double> site_series(std::size_t site) const {
        std::vector<double> s;
        s.reserve(T);
        for (std::size_t t = 0; t < T; ++t)
            if (valid_times[t]) s.push_back((*this)(site, t));
        return s;
    }
};

inline ResidualPanel residual_panel(const Panel& panel) {
    ResidualPanel res;
    res.n = panel.n_sites();
    res.T = panel.n_times();
    res.values.assign(res.n * res.T, 0.0);
    res.valid_times.assign(res.T, false);
    for (std::size_t t = 0; t < res.T; ++t) {
        const auto col = panel.column(t);
        const MomentSummary s = column_summary(col, VarianceMode::biased);
        if (!s.var_positive) continue;
        const double sd = std::sqrt(s.var_hat);
        for (std::size_t j = 0; j < res.n; ++j) res.values[t * res.n + j] = (col[j] - s.mu_hat) / sd;
        res.valid_times[t] = true;
    }
    if (res.valid_count() == 0)
        throw Error(ErrorCode::invalid_residuals,
                    "every time has zero sample variance; residuals undefined");
    return res;
}

struct LagCoverage {
    int lag = 0;
    double coverage = 0.0;  // percent of tested sites whose interval contains 0
    int tested = 0;
    int excluded = 0;       // degenerate series or |r| = 1
};

struct CorrelationReport {
    double alpha = 0.05;
    int valid_times = 0;
    std::vector<LagCoverage> per_lag_coverage;
    double spatial_coverage = std::numeric_limits<double>::quiet_NaN();
    int pairs_tested = 0;
    int pairs_excluded = 0;
};

// rho(h) = sum_{t <= N-h} z_t z_{t+h} / sum_t z_t^2
inline double autocorrelation(std::span<const double> z, std::size_t lag) {
    double denom = 0.0;
    for (double v : z) denom += v * v;
    if (!(denom > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    double num = 0.0;
    for (std::size_t t = 0; t + lag < z.size(); ++t) num += z[t] * z[t + lag];
    return num / denom;
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
    const double m = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= m;
    mb /= m;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (!(saa > 0.0) || !(sbb > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

inline CorrelationReport temporal_independence_report(const ResidualPanel& res, int max_lag,
                                                      double alpha) {
    if (max_lag < 1) throw Error(ErrorCode::domain, "max_lag must be >= 1");
    const std::size_t nv = res.valid_count();
    if (nv < static_cast<std::size_t>(max_lag) + 4)
        throw Error(ErrorCode::invalid_residuals,
                    "too few valid times for the requested lags (" + std::to_string(nv) + ")");

    CorrelationReport rep;
    rep.alpha = alpha;
    rep.valid_times = static_cast<int>(nv);
    std::vector<std::vector<double>> series(res.n);
    for (std::size_t j = 0; j < res.n; ++j) series[j] = res.site_series(j);

    for (int h = 1; h <= max_lag; ++h) {
        LagCoverage lc;
        lc.lag = h;
        int covered = 0;
        for (const auto& z : series) {
            const double r = autocorrelation(z, static_cast<std::size_t>(h));
            if (!std::isfinite(r) || std::fabs(r) >= 1.0) {
                ++lc.excluded;
                continue;
            }
            ++lc.tested;
            if (fisher_ci(r, static_cast<long>(nv), alpha).contains(0.0)) ++covered;
        }
        lc.coverage = lc.tested > 0 ? 100.0 * covered / lc.tested
                                    : std::numeric_limits<double>::quiet_NaN();
        rep.per_lag_coverage.push_back(lc);
    }
    return rep;
}

namespace detail {

// Pair index k in [0, n(n-1)/2) in lexicographic order -> (j, l), j < l.
inline std::pair<std::size_t, std::size_t> decode_pair(std::uint64_t k, std::size_t n) {
    std::size_t j = 0;
    std::uint64_t row = n - 1;
    while (k >= row) {
        k -= row;
        ++j;
        --row;
    }
    return {j, j + 1 + static_cast<std::size_t>(k)};
}

// max_pairs distinct indices from [0, total), sorted; Floyd's algorithm.
inline std::vector<std::uint64_t> sample_pairs(std::uint64_t total, std::uint64_t count,
                                               std::uint64_t seed) {
    UniformStream stream(seed, 0x5A17u, 0x9A15u, 0u);
    std::set<std::uint64_t> chosen;
    for (std::uint64_t i = total - count; i < total; ++i) {
        const auto r = static_cast<std::uint64_t>(stream.uniform() * static_cast<double>(i + 1));
        const std::uint64_t pick = std::min(r, i);
        if (!chosen.insert(pick).second) chosen.insert(i);
    }
    return {chosen.begin(), chosen.end()};
}

} // namespace detail

inline CorrelationReport spatial_independence_report(const ResidualPanel& res, double alpha,
                                                     std::uint64_t max_pairs = 20000,
                                                     std::uint64_t seed = 0) {
    if (res.n < 2) throw Error(ErrorCode::domain, "spatial report needs at least two sites");
    const std::size_t nv = res.valid_count();
    if (nv < 4)
        throw Error(ErrorCode::invalid_residuals, "spatial report needs at least 4 valid times");
    if (max_pairs < 1) throw Error(ErrorCode::domain, "max_pairs must be >= 1");

    std::vector<std::vector<double>> series(res.n);
    for (std::size_t j = 0; j < res.n; ++j) series[j] = res.site_series(j);

    const std::uint64_t total = static_cast<std::uint64_t>(res.n) * (res.n - 1) / 2;
    std::vector<std::uint64_t> picks;
    if (total <= max_pairs) {
        picks.resize(total);
        for (std::uint64_t k = 0; k < total; ++k) picks[k] = k;
    } else {
        picks = detail::sample_pairs(total, max_pairs, seed);
    }

    CorrelationReport rep;
    rep.alpha = alpha;
    rep.valid_times = static_cast<int>(nv);
    rep.pairs_tested = static_cast<int>(picks.size());
    int covered = 0, tested = 0;
    for (std::uint64_t k : picks) {
        const auto [j, l] = detail::decode_pair(k, res.n);
        const double r = pearson(series[j], series[l]);
        if (!std::isfinite(r) || std::fabs(r) >= 1.0) {
            ++rep.pairs_excluded;
            continue;
        }
        ++tested;
        if (fisher_ci(r, static_cast<long>(nv), alpha).contains(0.0)) ++covered;
    }
    rep.spatial_coverage = tested > 0 ? 100.0 * covered / tested
                                      : std::numeric_limits<double>::quiet_NaN();
    return rep;
}

} // namespace tlaw
