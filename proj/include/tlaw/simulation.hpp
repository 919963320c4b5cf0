#pragma once

// Data-generating processes and Monte-Carlo experiments.
//
// All generators produce entries independent across sites and times with a
// time-varying rate lambda_t (t = 1..T, in radians for the cosine profiles):
//
//   poisson               X ~ Poisson(lambda_t)                  (alpha, beta) = (1, 1)
//   chisq1                X = N(0, lambda_t)^2                   (2, 2)
//   poisson_mixture       X ~ Poisson(lambda_t Z + zeta_t)       (v, 2)
//                         Z = sqrt(3/4) exp(N(0,1)^2 / 8), v = Var Z
//   zero_inflated_chisq1  X = W N(0, lambda_t)^2, W ~ Bernoulli(p)  ((3 - p)/p, 2)
//   exact_tl              X in {0, 2 lambda_t} by site parity      (1, 2), no noise
//
// Panels are reproducible from (spec, n, T, seed): each entry draws from its
// own Philox stream keyed by the seed and addressed by (site, time, purpose).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "tlaw/asymptotics.hpp"
#include "tlaw/error.hpp"
#include "tlaw/estimator.hpp"
#include "tlaw/panel.hpp"
#include "tlaw/parallel.hpp"
#include "tlaw/random.hpp"

namespace tlaw {

enum class DgpKind { poisson, chisq1, poisson_mixture, zero_inflated_chisq1, exact_tl };
enum class LambdaProfile { exp_cos, three_plus_cos, custom };

inline const char* to_string(DgpKind k) {
    switch (k) {
        case DgpKind::poisson: return "poisson";
        case DgpKind::chisq1: return "chisq1";
        case DgpKind::poisson_mixture: return "poisson_mixture";
        case DgpKind::zero_inflated_chisq1: return "zero_inflated_chisq1";
        case DgpKind::exact_tl: return "exact_tl";
    }
    return "unknown";
}

inline const char* to_string(LambdaProfile p) {
    switch (p) {
        case LambdaProfile::exp_cos: return "exp_cos";
        case LambdaProfile::three_plus_cos: return "three_plus_cos";
        case LambdaProfile::custom: return "custom";
    }
    return "unknown";
}

struct DgpSpec {
    DgpKind kind = DgpKind::poisson;
    LambdaProfile profile = LambdaProfile::exp_cos;
    std::vector<double> custom_lambdas;  // used when profile == custom, cycled over t
    double p = 1.0;                      // retention probability for zero_inflated_chisq1

    void validate() const {
        if (kind == DgpKind::zero_inflated_chisq1 && !(p > 0.0 && p <= 1.0))
            throw Error(ErrorCode::domain, "zero-inflation probability p must lie in (0, 1]");
        if (profile == LambdaProfile::custom) {
            if (custom_lambdas.empty())
                throw Error(ErrorCode::domain, "custom lambda profile is empty");
            for (double l : custom_lambdas)
                if (!(l > 0.0) || !std::isfinite(l))
                    throw Error(ErrorCode::domain, "custom lambdas must be positive and finite");
        }
    }
};

// lambda_t for t = 1..T.
inline double lambda_at(const DgpSpec& spec, std::size_t t) {
    const double x = static_cast<double>(t);
    switch (spec.profile) {
        case LambdaProfile::exp_cos: return std::exp(std::cos(x));
        case LambdaProfile::three_plus_cos: return 3.0 + std::cos(x);
        case LambdaProfile::custom: return spec.custom_lambdas[(t - 1) % spec.custom_lambdas.size()];
    }
    return 1.0;
}

inline std::vector<double> lambda_profile(const DgpSpec& spec, std::size_t T) {
    std::vector<double> out(T);
    for (std::size_t t = 1; t <= T; ++t) out[t - 1] = lambda_at(spec, t);
    return out;
}

// Var Z for Z = sqrt(3/4) exp(N^2/8): E Z = 1 and E Z^2 = (3/4) sqrt(2).
inline double mixture_v() { return 0.75 * std::numbers::sqrt2 - 1.0; }

// zeta such that the mixture mean mu = lambda + zeta solves v mu^2 = mu + v lambda^2.
inline double mixture_zeta(double lambda) {
    const double v = mixture_v();
    return (1.0 + std::sqrt(1.0 + 4.0 * v * v * lambda * lambda)) / (2.0 * v) - lambda;
}

inline std::pair<double, double> dgp_true_params(const DgpSpec& spec) {
    switch (spec.kind) {
        case DgpKind::poisson: return {1.0, 1.0};
        case DgpKind::chisq1: return {2.0, 2.0};
        case DgpKind::poisson_mixture: return {mixture_v(), 2.0};
        case DgpKind::zero_inflated_chisq1: return {(3.0 - spec.p) / spec.p, 2.0};
        case DgpKind::exact_tl: return {1.0, 2.0};
    }
    return {1.0, 1.0};
}

inline Vec2 dgp_true_theta(const DgpSpec& spec) {
    const auto [alpha, beta] = dgp_true_params(spec);
    return {std::log(alpha), beta};
}

namespace detail {

enum StreamTag : std::uint32_t { main_stream = 0, bernoulli_stream = 1, mixture_stream = 2 };

inline double draw_entry(const DgpSpec& spec, double lambda, double zeta, std::uint64_t seed,
                         std::uint32_t site, std::uint32_t time) {
    UniformStream main(seed, site, time, main_stream);
    switch (spec.kind) {
        case DgpKind::poisson:
            return static_cast<double>(draw_poisson(main, lambda));
        case DgpKind::chisq1: {
            const double z = draw_normal(main);
            return lambda * z * z;
        }
        case DgpKind::poisson_mixture: {
            UniformStream mix(seed, site, time, mixture_stream);
            const double g = draw_normal(mix);
            const double z = std::sqrt(0.75) * std::exp(g * g / 8.0);
            const double rate = lambda * z + zeta;
            if (!(rate > 0.0))
                throw Error(ErrorCode::domain, "poisson_mixture: non-positive Poisson rate");
            return static_cast<double>(draw_poisson(main, rate));
        }
        case DgpKind::zero_inflated_chisq1: {
            UniformStream w(seed, site, time, bernoulli_stream);
            const bool keep = draw_bernoulli(w, spec.p);
            const double z = draw_normal(main);
            return keep ? lambda * z * z : 0.0;
        }
        case DgpKind::exact_tl:
            return (site % 2 == 0) ? 0.0 : 2.0 * lambda;
    }
    return 0.0;
}

} // namespace detail

inline Panel generate_panel(const DgpSpec& spec, std::size_t n, std::size_t T, std::uint64_t seed) {
    spec.validate();
    if (n < 2 || T < 2) throw Error(ErrorCode::domain, "generate_panel: needs n >= 2 and T >= 2");
    if (spec.kind == DgpKind::exact_tl && n % 2 != 0)
        throw Error(ErrorCode::domain, "exact_tl generator needs an even number of sites");
    std::vector<double> values(n * T);
    for (std::size_t t = 0; t < T; ++t) {
        const double lambda = lambda_at(spec, t + 1);
        const double zeta = spec.kind == DgpKind::poisson_mixture ? mixture_zeta(lambda) : 0.0;
        for (std::size_t j = 0; j < n; ++j)
            values[t * n + j] = detail::draw_entry(spec, lambda, zeta, seed,
                                                   static_cast<std::uint32_t>(j),
                                                   static_cast<std::uint32_t>(t));
    }
    return Panel(n, T, std::move(values));
}

// ---------------------------------------------------------------------------
// RMSE grid
// ---------------------------------------------------------------------------

struct GridCell {
    std::size_t n = 0;
    std::size_t T = 0;
};

struct McCell {
    std::size_t n = 0;
    std::size_t T = 0;
    double rmse_beta = 0.0;
    double rmse_theta1 = 0.0;
    int replicates = 0;  // requested
    int failures = 0;    // replicates whose fit failed (excluded from the RMSE)
};

struct McResult {
    std::vector<McCell> grid;
    std::uint64_t seed = 0;
    DgpSpec dgp;
};

// Replicate r of cell c uses derive_seed(seed, c, r).
inline McResult rmse_experiment(const DgpSpec& dgp, const std::vector<GridCell>& grid, int reps,
                                std::uint64_t seed, const FitOptions& opts = {}) {
    dgp.validate();
    if (reps < 1) throw Error(ErrorCode::domain, "rmse_experiment: reps must be >= 1");
    const Vec2 truth = dgp_true_theta(dgp);

    struct Outcome {
        bool ok = false;
        double err_beta = 0.0;
        double err_theta1 = 0.0;
    };
    const std::size_t per_cell = static_cast<std::size_t>(reps);
    std::vector<Outcome> outcomes(grid.size() * per_cell);
    parallel_for(outcomes.size(), [&](std::size_t k) {
        const std::size_t c = k / per_cell;
        const std::size_t r = k % per_cell;
        const std::uint64_t s =
            derive_seed(seed, static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(r));
        try {
            const Panel panel = generate_panel(dgp, grid[c].n, grid[c].T, s);
            const TLFit fit = fit_tl(panel, opts);
            outcomes[k] = {true, fit.theta2 - truth[1], fit.theta1 - truth[0]};
        } catch (const Error&) {
            outcomes[k] = {};
        }
    });

    McResult result;
    result.seed = seed;
    result.dgp = dgp;
    for (std::size_t c = 0; c < grid.size(); ++c) {
        McCell cell;
        cell.n = grid[c].n;
        cell.T = grid[c].T;
        cell.replicates = reps;
        double sb = 0.0, s1 = 0.0;
        int ok = 0;
        for (std::size_t r = 0; r < per_cell; ++r) {
            const auto& o = outcomes[c * per_cell + r];
            if (!o.ok) {
                ++cell.failures;
                continue;
            }
            sb += o.err_beta * o.err_beta;
            s1 += o.err_theta1 * o.err_theta1;
            ++ok;
        }
        if (ok > 0) {
            cell.rmse_beta = std::sqrt(sb / ok);
            cell.rmse_theta1 = std::sqrt(s1 / ok);
        } else {
            cell.rmse_beta = cell.rmse_theta1 = std::nan("");
        }
        result.grid.push_back(cell);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Normalized-statistic (QQ) experiment
// ---------------------------------------------------------------------------

struct QqSample {
    std::vector<int> replicate;  // index of each successful replicate
    std::vector<Vec2> corrected;
    std::vector<Vec2> uncorrected;
    std::vector<double> theoretical_quantiles;  // Phi^{-1}((i - 0.5) / m), i = 1..m
    int failures = 0;
};

inline QqSample qq_experiment(const DgpSpec& dgp, std::size_t n, std::size_t T, int reps,
                              std::uint64_t seed, const FitOptions& opts = {}) {
    dgp.validate();
    if (reps < 2) throw Error(ErrorCode::domain, "qq_experiment: reps must be >= 2");
    const Vec2 truth = dgp_true_theta(dgp);

    struct Outcome {
        bool ok = false;
        NormalizedStatistic stat;
    };
    std::vector<Outcome> outcomes(static_cast<std::size_t>(reps));
    parallel_for(outcomes.size(), [&](std::size_t r) {
        const std::uint64_t s = derive_seed(seed, 0, static_cast<std::uint32_t>(r));
        try {
            const Panel panel = generate_panel(dgp, n, T, s);
            outcomes[r] = {true, normalized_statistics(panel, truth, opts)};
        } catch (const Error&) {
            outcomes[r] = {};
        }
    });

    QqSample out;
    for (std::size_t r = 0; r < outcomes.size(); ++r) {
        if (!outcomes[r].ok) {
            ++out.failures;
            continue;
        }
        out.replicate.push_back(static_cast<int>(r));
        out.corrected.push_back(outcomes[r].stat.corrected);
        out.uncorrected.push_back(outcomes[r].stat.uncorrected);
    }
    const std::size_t m = out.corrected.size();
    out.theoretical_quantiles.reserve(m);
    for (std::size_t i = 1; i <= m; ++i)
        out.theoretical_quantiles.push_back(
            normal_quantile((static_cast<double>(i) - 0.5) / static_cast<double>(m)));
    return out;
}

// ---------------------------------------------------------------------------
// Interval coverage experiment
// ---------------------------------------------------------------------------

struct CoverageResult {
    std::array<int, 2> corrected{};     // replicates whose corrected interval covers theta_i
    std::array<int, 2> uncorrected{};
    std::array<int, 2> conventional{};
    int successes = 0;
    int failures = 0;

    double rate(const std::array<int, 2>& hits, int i) const {
        return successes > 0 ? static_cast<double>(hits[i]) / successes : std::nan("");
    }
};

inline CoverageResult coverage_experiment(const DgpSpec& dgp, std::size_t n, std::size_t T,
                                          int reps, std::uint64_t seed, double alpha,
                                          const FitOptions& opts = {}) {
    dgp.validate();
    if (reps < 1) throw Error(ErrorCode::domain, "coverage_experiment: reps must be >= 1");
    const Vec2 truth = dgp_true_theta(dgp);

    struct Outcome {
        bool ok = false;
        std::array<bool, 2> corrected{}, uncorrected{}, conventional{};
    };
    std::vector<Outcome> outcomes(static_cast<std::size_t>(reps));
    parallel_for(outcomes.size(), [&](std::size_t r) {
        const std::uint64_t s = derive_seed(seed, 0, static_cast<std::uint32_t>(r));
        try {
            const Panel panel = generate_panel(dgp, n, T, s);
            const PanelInference inf = infer(panel, opts, alpha);
            const ConventionalCi conv = conventional_ci(inf.summaries, inf.fit, alpha);
            Outcome o;
            o.ok = true;
            for (int i = 0; i < 2; ++i) {
                o.corrected[i] = inf.asymptotic.intervals_corrected[i].contains(truth[i]);
                o.uncorrected[i] = inf.asymptotic.intervals_uncorrected[i].contains(truth[i]);
            }
            o.conventional = {conv.intercept.contains(truth[0]), conv.slope.contains(truth[1])};
            outcomes[r] = o;
        } catch (const Error&) {
            outcomes[r] = {};
        }
    });

    CoverageResult out;
    for (const auto& o : outcomes) {
        if (!o.ok) {
            ++out.failures;
            continue;
        }
        ++out.successes;
        for (int i = 0; i < 2; ++i) {
            out.corrected[i] += o.corrected[i];
            out.uncorrected[i] += o.uncorrected[i];
            out.conventional[i] += o.conventional[i];
        }
    }
    return out;
}

} // namespace tlaw
