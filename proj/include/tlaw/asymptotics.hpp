#pragma once

// Large-sample inference for the log-log fit.
//
// With m_t = (E X, E X^2) at time t, the fit's normal equations are the time
// average of phi_theta(m_hat_t), where
//
//     phi_1(x, y) = log(y - x^2) - theta1 - theta2 log x
//     phi_2(x, y) = log x * phi_1(x, y)
//
// A first-order expansion of phi around m_t gives the sandwich matrix
//
//     Gamma = (1/T) sum_t J(m_t) Sigma_t J(m_t)',   Sigma_t = Var(X, X^2),
//
// and the second-order term gives the bias vector
//
//     E = (1/T) sum_t (Tr(H1(m_t) Sigma_t), Tr(H2(m_t) Sigma_t)),
//
// with H1, H2 the Hessians of phi_1, phi_2. Both are estimated by plugging in
// theta_hat, m_hat_t and the empirical covariance of (X, X^2).
//
// sqrt(nT) C D (theta_hat - theta) - (1/2) sqrt(T/n) C E is asymptotically
// standard normal for C = Gamma^{-1/2}, whichever way T/n behaves.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tlaw/error.hpp"
#include "tlaw/estimator.hpp"
#include "tlaw/numerics.hpp"
#include "tlaw/panel.hpp"

namespace tlaw {

struct PhiDerivatives {
    Vec2 value{};
    Mat2 jacobian{};   // row l = (d phi_l / dx, d phi_l / dy)
    SymMatrix2 hessian1;
    SymMatrix2 hessian2;
};

namespace detail {

inline void check_phi_domain(double x, double y) {
    if (!(x > 0.0) || !(y - x * x > 0.0) || !std::isfinite(x) || !std::isfinite(y))
        throw Error(ErrorCode::domain,
                    "phi: requires x > 0 and y - x^2 > 0 (got x=" + std::to_string(x) +
                        ", y=" + std::to_string(y) + ")");
}

} // namespace detail

inline Vec2 phi(const Vec2& theta, double x, double y) {
    detail::check_phi_domain(x, y);
    const double lx = std::log(x);
    const double lv = std::log(y - x * x);
    const double dev = lv - theta[0] - theta[1] * lx;
    return {dev, lx * lv - theta[0] * lx - theta[1] * lx * lx};
}

inline Mat2 phi_jacobian(const Vec2& theta, double x, double y) {
    detail::check_phi_domain(x, y);
    const double d = y - x * x;
    const double lx = std::log(x);
    const double lv = std::log(d);
    Mat2 j{};
    j[0][0] = -2.0 * x / d - theta[1] / x;
    j[0][1] = 1.0 / d;
    j[1][0] = lv / x - 2.0 * x * lx / d - theta[0] / x - 2.0 * theta[1] * lx / x;
    j[1][1] = lx / d;
    return j;
}

inline std::pair<SymMatrix2, SymMatrix2> phi_hessians(const Vec2& theta, double x, double y) {
    detail::check_phi_domain(x, y);
    const double d = y - x * x;
    const double d2 = d * d;
    const double x2 = x * x;
    const double lx = std::log(x);
    const double lv = std::log(d);

    SymMatrix2 h1;
    h1.a11 = -2.0 / d - 4.0 * x2 / d2 + theta[1] / x2;
    h1.a22 = -1.0 / d2;
    h1.a12 = 2.0 * x / d2;

    SymMatrix2 h2;
    h2.a11 = -4.0 / d - lv / x2 - 2.0 * lx / d - 4.0 * x2 * lx / d2 +
             (theta[0] - 2.0 * theta[1]) / x2 + 2.0 * theta[1] * lx / x2;
    h2.a22 = -lx / d2;
    h2.a12 = 1.0 / (x * d) + 2.0 * x * lx / d2;
    return {h1, h2};
}

inline PhiDerivatives phi_derivatives(const Vec2& theta, double x, double y) {
    PhiDerivatives out;
    out.value = phi(theta, x, y);
    out.jacobian = phi_jacobian(theta, x, y);
    std::tie(out.hessian1, out.hessian2) = phi_hessians(theta, x, y);
    return out;
}

// Empirical covariance of Y_j = (X_j, X_j^2) over one column (1/n normalization).
inline SymMatrix2 sigma_hat_t(std::span<const double> column) {
    const double n = static_cast<double>(column.size());
    if (column.size() < 2)
        throw Error(ErrorCode::domain, "sigma_hat_t: needs at least two observations");
    double m1 = 0.0, m2 = 0.0;
    for (double x : column) {
        m1 += x;
        m2 += x * x;
    }
    m1 /= n;
    m2 /= n;
    SymMatrix2 s;
    for (double x : column) {
        const double a = x - m1;
        const double b = x * x - m2;
        s.a11 += a * a;
        s.a12 += a * b;
        s.a22 += b * b;
    }
    return (1.0 / n) * s;
}

inline std::vector<SymMatrix2> sigma_hats(const Panel& panel) {
    std::vector<SymMatrix2> out;
    out.reserve(panel.n_times());
    for (std::size_t t = 0; t < panel.n_times(); ++t) out.push_back(sigma_hat_t(panel.column(t)));
    return out;
}

// (Tr(H1 Sigma), Tr(H2 Sigma)).
inline Vec2 bias_term(const SymMatrix2& h1, const SymMatrix2& h2, const SymMatrix2& sigma) {
    return {trace_product(h1, sigma), trace_product(h2, sigma)};
}

// Plug-in Gamma_hat and E_hat over the times where phi is defined.
struct SandwichTerms {
    SymMatrix2 gamma;
    Vec2 e{};
    int used_times = 0;
    int skipped_times = 0;
};

inline bool phi_defined_at(const MomentSummary& s) {
    return s.mu_hat > 0.0 && s.m2_hat - s.mu_hat * s.mu_hat > 0.0;
}

inline SandwichTerms sandwich_terms(std::span<const MomentSummary> summaries,
                                    std::span<const SymMatrix2> sigmas, const Vec2& theta) {
    if (summaries.size() != sigmas.size())
        throw Error(ErrorCode::domain, "sandwich_terms: summaries and covariances differ in length");
    SandwichTerms out;
    for (std::size_t t = 0; t < summaries.size(); ++t) {
        const auto& s = summaries[t];
        if (!phi_defined_at(s)) {
            ++out.skipped_times;
            continue;
        }
        const Mat2 j = phi_jacobian(theta, s.mu_hat, s.m2_hat);
        const auto [h1, h2] = phi_hessians(theta, s.mu_hat, s.m2_hat);
        out.gamma = out.gamma + congruence(j, sigmas[t]);
        out.e = out.e + bias_term(h1, h2, sigmas[t]);
        ++out.used_times;
    }
    if (out.used_times == 0)
        throw Error(ErrorCode::singular_gamma,
                    "no time with positive sample mean and variance; Gamma_hat undefined");
    const double inv = 1.0 / out.used_times;
    out.gamma = inv * out.gamma;
    out.e = inv * out.e;
    return out;
}

inline SymMatrix2 gamma_hat(std::span<const MomentSummary> summaries,
                            std::span<const SymMatrix2> sigmas, const TLFit& fit) {
    return sandwich_terms(summaries, sigmas, fit.theta()).gamma;
}

inline Vec2 e_hat(std::span<const MomentSummary> summaries, std::span<const SymMatrix2> sigmas,
                  const TLFit& fit) {
    return sandwich_terms(summaries, sigmas, fit.theta()).e;
}

// ---------------------------------------------------------------------------
// Confidence intervals
// ---------------------------------------------------------------------------

struct AsymptoticReport {
    SymMatrix2 gamma_hat;
    SymMatrix2 c_hat;           // gamma_hat^{-1/2}
    Vec2 e_hat{};
    SymMatrix2 h_n;             // D^{-1} gamma_hat D^{-1}
    Vec2 m_n{};                 // bias shift of the corrected intervals
    std::array<Interval, 2> intervals_corrected{};
    std::array<Interval, 2> intervals_uncorrected{};
    double min_eigen_gamma = 0.0;
    double quantile = 0.0;      // q_{1 - alpha/2}
    double alpha = 0.05;
    long n = 0;
    long T = 0;
    bool correction = true;     // which family is primary
    int used_times = 0;
    int skipped_times = 0;

    const std::array<Interval, 2>& intervals() const {
        return correction ? intervals_corrected : intervals_uncorrected;
    }
};

// Each interval is
//     [theta_i - (sqrt(H(i,i)) q + M(i)) / sqrt(nT),  theta_i + (sqrt(H(i,i)) q - M(i)) / sqrt(nT)]
// with M = (1/2) sqrt(T/n) D^{-1} E for the corrected family and M = 0 otherwise.
inline AsymptoticReport confidence_intervals(const TLFit& fit, const SymMatrix2& gamma,
                                             const Vec2& e, long n, long T, double alpha,
                                             bool correction = true) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw Error(ErrorCode::domain, "confidence_intervals: alpha must lie in (0,1)");
    if (n < 2 || T < 1) throw Error(ErrorCode::domain, "confidence_intervals: invalid n or T");

    AsymptoticReport r;
    r.gamma_hat = gamma;
    r.e_hat = e;
    r.n = n;
    r.T = T;
    r.alpha = alpha;
    r.correction = correction;
    r.min_eigen_gamma = min_eigenvalue(gamma);
    r.c_hat = sym2x2_inv_sqrt(gamma);  // throws SingularMatrixError

    const SymMatrix2 d_inv = inverse(fit.design.D);
    r.h_n = congruence(d_inv.full(), gamma);
    const double nd = static_cast<double>(n);
    const double td = static_cast<double>(T);
    r.m_n = (0.5 * std::sqrt(td / nd)) * (d_inv * e);
    r.quantile = normal_quantile(1.0 - alpha / 2.0);

    const double root_nt = std::sqrt(nd * td);
    const Vec2 theta = fit.theta();
    for (int i = 0; i < 2; ++i) {
        const double half = std::sqrt(r.h_n(i, i)) * r.quantile;
        r.intervals_uncorrected[i] = {theta[i] - half / root_nt, theta[i] + half / root_nt};
        r.intervals_corrected[i] = {theta[i] - (half + r.m_n[i]) / root_nt,
                                    theta[i] + (half - r.m_n[i]) / root_nt};
    }
    return r;
}

// Full inference on a panel: moments, fit, and both interval families.
struct PanelInference {
    std::vector<MomentSummary> summaries;
    TLFit fit;
    AsymptoticReport asymptotic;
};

inline PanelInference infer(const Panel& panel, const FitOptions& opts, double alpha,
                            bool correction = true) {
    PanelInference out;
    const Panel p = rescale_panel(panel, opts.rescale);
    out.summaries = column_moments(p, opts.variance);
    out.fit = fit_summaries(out.summaries, opts.variance, opts.degenerate);
    const auto sig = sigma_hats(p);
    const auto terms = sandwich_terms(out.summaries, sig, out.fit.theta());
    out.asymptotic = confidence_intervals(out.fit, terms.gamma, terms.e,
                                          static_cast<long>(p.n_sites()),
                                          out.fit.design.T_used, alpha, correction);
    out.asymptotic.used_times = terms.used_times;
    out.asymptotic.skipped_times = terms.skipped_times;
    return out;
}

// ---------------------------------------------------------------------------
// Normalized statistic
// ---------------------------------------------------------------------------

struct NormalizedStatistic {
    Vec2 uncorrected{};  // sqrt(nT) C D (theta_hat - theta)
    Vec2 corrected{};    // uncorrected - (1/2) sqrt(T/n) C E
};

inline NormalizedStatistic normalized_statistics(const Panel& panel, const Vec2& true_theta,
                                                 const FitOptions& opts = {}) {
    const auto summaries = column_moments(panel, opts.variance);
    const TLFit fit = fit_summaries(summaries, opts.variance, opts.degenerate);
    const auto sig = sigma_hats(panel);
    const auto terms = sandwich_terms(summaries, sig, fit.theta());
    const SymMatrix2 c = sym2x2_inv_sqrt(terms.gamma);

    const double n = static_cast<double>(panel.n_sites());
    const double t = static_cast<double>(fit.design.T_used);
    NormalizedStatistic out;
    out.uncorrected = std::sqrt(n * t) * (c * (fit.design.D * (fit.theta() - true_theta)));
    out.corrected = out.uncorrected - (0.5 * std::sqrt(t / n)) * (c * terms.e);
    return out;
}

inline Vec2 normalized_statistic(const Panel& panel, const Vec2& true_theta, bool corrected,
                                 const FitOptions& opts = {}) {
    const auto s = normalized_statistics(panel, true_theta, opts);
    return corrected ? s.corrected : s.uncorrected;
}

inline double min_eigen_gamma(const SymMatrix2& gamma) { return min_eigenvalue(gamma); }

// ---------------------------------------------------------------------------
// Poisson closed forms
// ---------------------------------------------------------------------------

// Var(X, X^2) for X ~ Poisson(mu), from the raw moments mu, mu^2 + mu,
// mu^3 + 3mu^2 + mu and mu^4 + 6mu^3 + 7mu^2 + mu.
inline SymMatrix2 poisson_var_y(double mu) {
    if (!(mu > 0.0)) throw Error(ErrorCode::domain, "poisson_var_y: mu must be positive");
    return {mu, 2.0 * mu * mu + mu, 4.0 * mu * mu * mu + 6.0 * mu * mu + mu};
}

inline double poisson_var_y_det(double mu) { return 2.0 * mu * mu * mu; }

// Population Gamma_T for independent Poisson(lambda_t) columns.
inline SymMatrix2 poisson_gamma_oracle(std::span<const double> lambdas, const Vec2& theta) {
    if (lambdas.empty()) throw Error(ErrorCode::domain, "poisson_gamma_oracle: no rates");
    SymMatrix2 g;
    for (double mu : lambdas) {
        if (!(mu > 0.0))
            throw Error(ErrorCode::domain, "poisson_gamma_oracle: rates must be positive");
        const Mat2 j = phi_jacobian(theta, mu, mu + mu * mu);
        g = g + congruence(j, poisson_var_y(mu));
    }
    return (1.0 / static_cast<double>(lambdas.size())) * g;
}

} // namespace tlaw
