#pragma once

// Abundance panels (sites x times) and their per-time sample moments.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tlaw/error.hpp"

namespace tlaw {

enum class VarianceMode { biased, unbiased };
enum class RescaleMode { none, grand_mean };

inline const char* to_string(VarianceMode m) {
    return m == VarianceMode::biased ? "biased" : "unbiased";
}
inline const char* to_string(RescaleMode m) {
    return m == RescaleMode::none ? "none" : "grand_mean";
}

// Rectangular n x T array of nonnegative abundances X(j, t), j a site and t a
// time. Storage is time-major so that each time column is contiguous.
class Panel {
public:
    Panel() = default;

    // values[t * n_sites + j]
    Panel(std::size_t n_sites, std::size_t n_times, std::vector<double> values,
          std::vector<std::string> site_labels = {},
          std::vector<std::string> time_labels = {})
        : n_(n_sites), t_(n_times), values_(std::move(values)),
          site_labels_(std::move(site_labels)), time_labels_(std::move(time_labels)) {
        validate();
    }

    // Builds a panel from rows[j][t] (one row per site).
    static Panel from_rows(const std::vector<std::vector<double>>& rows,
                           std::vector<std::string> site_labels = {},
                           std::vector<std::string> time_labels = {}) {
        const std::size_t n = rows.size();
        const std::size_t t = n == 0 ? 0 : rows.front().size();
        std::vector<double> v(n * t);
        for (std::size_t j = 0; j < n; ++j) {
            if (rows[j].size() != t)
                throw Error(ErrorCode::invalid_panel, "panel rows must all have the same length");
            for (std::size_t k = 0; k < t; ++k) v[k * n + j] = rows[j][k];
        }
        return Panel(n, t, std::move(v), std::move(site_labels), std::move(time_labels));
    }

    std::size_t n_sites() const { return n_; }
    std::size_t n_times() const { return t_; }

    double operator()(std::size_t site, std::size_t time) const { return values_[time * n_ + site]; }

    std::span<const double> column(std::size_t time) const {
        return {values_.data() + time * n_, n_};
    }

    const std::vector<double>& values() const { return values_; }
    const std::vector<std::string>& site_labels() const { return site_labels_; }
    const std::vector<std::string>& time_labels() const { return time_labels_; }

    friend bool operator==(const Panel&, const Panel&) = default;

private:
    void validate() const {
        if (n_ < 2 || t_ < 2)
            throw Error(ErrorCode::invalid_panel, "panel needs at least 2 sites and 2 times");
        if (values_.size() != n_ * t_)
            throw Error(ErrorCode::invalid_panel, "panel value count does not match n x T");
        if (!site_labels_.empty() && site_labels_.size() != n_)
            throw Error(ErrorCode::invalid_panel, "site label count does not match n");
        if (!time_labels_.empty() && time_labels_.size() != t_)
            throw Error(ErrorCode::invalid_panel, "time label count does not match T");
        for (std::size_t t = 0; t < t_; ++t)
            for (std::size_t j = 0; j < n_; ++j) {
                const double x = values_[t * n_ + j];
                if (!std::isfinite(x) || x < 0.0)
                    throw Error(ErrorCode::invalid_panel,
                                "panel value at site " + std::to_string(j) + ", time " +
                                    std::to_string(t) + " is negative or not finite");
            }
    }

    std::size_t n_ = 0;
    std::size_t t_ = 0;
    std::vector<double> values_;
    std::vector<std::string> site_labels_;
    std::vector<std::string> time_labels_;
};

// Sample moments of one time column.
struct MomentSummary {
    double mu_hat = 0.0;   // (1/n) sum X
    double m2_hat = 0.0;   // (1/n) sum X^2
    double var_hat = 0.0;  // biased or unbiased sample variance
    bool mean_positive = false;
    bool var_positive = false;
};

inline MomentSummary column_summary(std::span<const double> column,
                                    VarianceMode mode = VarianceMode::biased) {
    const double n = static_cast<double>(column.size());
    double s1 = 0.0, s2 = 0.0;
    for (double x : column) {
        s1 += x;
        s2 += x * x;
    }
    MomentSummary s;
    s.mu_hat = s1 / n;
    s.m2_hat = s2 / n;
    double var = s.m2_hat - s.mu_hat * s.mu_hat;
    if (var < 1e-12 * s.m2_hat) {
        // cancellation: fall back to the centered two-pass sum
        double c = 0.0;
        for (double x : column) c += (x - s.mu_hat) * (x - s.mu_hat);
        var = c / n;
    }
    if (mode == VarianceMode::unbiased) var *= n / (n - 1.0);
    s.var_hat = var;
    s.mean_positive = s.mu_hat > 0.0;
    s.var_positive = s.var_hat > 0.0;
    return s;
}

inline std::vector<MomentSummary> column_moments(const Panel& panel,
                                                 VarianceMode mode = VarianceMode::biased) {
    std::vector<MomentSummary> out;
    out.reserve(panel.n_times());
    for (std::size_t t = 0; t < panel.n_times(); ++t)
        out.push_back(column_summary(panel.column(t), mode));
    return out;
}

inline double grand_mean(const Panel& panel) {
    double s = 0.0;
    for (double x : panel.values()) s += x;
    return s / static_cast<double>(panel.values().size());
}

// Multiplies every entry by a positive constant.
inline Panel scale_panel(const Panel& panel, double factor) {
    if (!(factor > 0.0) || !std::isfinite(factor))
        throw Error(ErrorCode::domain, "scale_panel: factor must be positive and finite");
    std::vector<double> v = panel.values();
    for (double& x : v) x *= factor;
    return Panel(panel.n_sites(), panel.n_times(), std::move(v), panel.site_labels(),
                 panel.time_labels());
}

// Grand-mean mode divides every entry (zeros included) by the mean of all
// n x T entries.
inline Panel rescale_panel(const Panel& panel, RescaleMode mode) {
    if (mode == RescaleMode::none) return panel;
    const double g = grand_mean(panel);
    if (!(g > 0.0))
        throw Error(ErrorCode::domain, "rescale_panel: grand mean is zero");
    std::vector<double> v = panel.values();
    for (double& x : v) x /= g;
    return Panel(panel.n_sites(), panel.n_times(), std::move(v), panel.site_labels(),
                 panel.time_labels());
}

// Swaps the roles of sites and times; fitting the result estimates the
// temporal power law.
inline Panel transpose_axis(const Panel& panel) {
    const std::size_t n = panel.n_sites();
    const std::size_t t = panel.n_times();
    std::vector<double> v(n * t);
    // new panel has t sites and n times: v[j * t + k] = X(j, k)
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < t; ++k) v[j * t + k] = panel(j, k);
    return Panel(t, n, std::move(v), panel.time_labels(), panel.site_labels());
}

} // namespace tlaw
