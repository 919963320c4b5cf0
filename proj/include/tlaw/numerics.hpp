#pragma once

// Small numerical primitives shared by the estimator, the asymptotic
// machinery and the diagnostics: 2-vectors, 2x2 matrices, the standard
// normal quantile, closed-form symmetric 2x2 eigen-decomposition and
// Fisher-z correlation intervals.

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/distributions/students_t.hpp>

#include "tlaw/error.hpp"

namespace tlaw {

using Vec2 = std::array<double, 2>;

// General 2x2 matrix, row-major: m[row][col].
using Mat2 = std::array<std::array<double, 2>, 2>;

// Symmetric 2x2 matrix stored by its upper triangle.
struct SymMatrix2 {
    double a11 = 0.0;
    double a12 = 0.0;
    double a22 = 0.0;

    static constexpr SymMatrix2 identity() { return {1.0, 0.0, 1.0}; }

    constexpr double trace() const { return a11 + a22; }
    constexpr double det() const { return a11 * a22 - a12 * a12; }

    constexpr double operator()(int i, int j) const {
        if (i == 0 && j == 0) return a11;
        if (i == 1 && j == 1) return a22;
        return a12;
    }

    Mat2 full() const { return {{{a11, a12}, {a12, a22}}}; }

    friend constexpr bool operator==(const SymMatrix2&, const SymMatrix2&) = default;
};

struct Interval {
    double lower = 0.0;
    double upper = 0.0;

    constexpr double width() const { return upper - lower; }
    constexpr double center() const { return 0.5 * (lower + upper); }
    constexpr bool contains(double x) const { return lower <= x && x <= upper; }
};

// ---------------------------------------------------------------------------
// Small matrix algebra
// ---------------------------------------------------------------------------

inline Vec2 operator+(const Vec2& a, const Vec2& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec2 operator-(const Vec2& a, const Vec2& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec2 operator*(double s, const Vec2& a) { return {s * a[0], s * a[1]}; }

inline Vec2 operator*(const SymMatrix2& m, const Vec2& v) {
    return {m.a11 * v[0] + m.a12 * v[1], m.a12 * v[0] + m.a22 * v[1]};
}

inline Vec2 operator*(const Mat2& m, const Vec2& v) {
    return {m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]};
}

inline Mat2 operator*(const Mat2& a, const Mat2& b) {
    Mat2 r{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
    return r;
}

inline SymMatrix2 operator+(const SymMatrix2& a, const SymMatrix2& b) {
    return {a.a11 + b.a11, a.a12 + b.a12, a.a22 + b.a22};
}

inline SymMatrix2 operator*(double s, const SymMatrix2& a) {
    return {s * a.a11, s * a.a12, s * a.a22};
}

// A * S * A' for a general A and symmetric S; the result is symmetrized.
inline SymMatrix2 congruence(const Mat2& a, const SymMatrix2& s) {
    const Mat2 as = a * s.full();
    const double r11 = as[0][0] * a[0][0] + as[0][1] * a[0][1];
    const double r12 = as[0][0] * a[1][0] + as[0][1] * a[1][1];
    const double r21 = as[1][0] * a[0][0] + as[1][1] * a[0][1];
    const double r22 = as[1][0] * a[1][0] + as[1][1] * a[1][1];
    return {r11, 0.5 * (r12 + r21), r22};
}

// Tr(A * B) for symmetric A, B.
inline double trace_product(const SymMatrix2& a, const SymMatrix2& b) {
    return a.a11 * b.a11 + 2.0 * a.a12 * b.a12 + a.a22 * b.a22;
}

// Inverse of a symmetric 2x2 matrix; throws when the determinant vanishes.
inline SymMatrix2 inverse(const SymMatrix2& m) {
    const double d = m.det();
    if (d == 0.0 || !std::isfinite(d))
        throw Error(ErrorCode::domain, "inverse: singular 2x2 matrix");
    return {m.a22 / d, -m.a12 / d, m.a11 / d};
}

// Operator (spectral) norm of a general 2x2 matrix.
inline double operator_norm(const Mat2& m) {
    // sqrt of the largest eigenvalue of m' m
    const double p = m[0][0] * m[0][0] + m[1][0] * m[1][0];
    const double q = m[0][0] * m[0][1] + m[1][0] * m[1][1];
    const double r = m[0][1] * m[0][1] + m[1][1] * m[1][1];
    const double half_tr = 0.5 * (p + r);
    const double disc = std::hypot(0.5 * (p - r), q);
    return std::sqrt(half_tr + disc);
}

// ---------------------------------------------------------------------------
// Symmetric 2x2 eigen-decomposition
// ---------------------------------------------------------------------------

struct SymEigen2 {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    Vec2 v_min{};  // unit eigenvector for lambda_min
    Vec2 v_max{};  // unit eigenvector for lambda_max
};

inline SymEigen2 sym_eigen(const SymMatrix2& m) {
    const double half_sum = 0.5 * (m.a11 + m.a22);
    const double half_diff = 0.5 * (m.a11 - m.a22);
    const double radius = std::hypot(half_diff, m.a12);

    SymEigen2 e;
    e.lambda_max = half_sum + radius;
    // Vieta keeps the small eigenvalue accurate when the two nearly cancel.
    e.lambda_min = (e.lambda_max != 0.0) ? m.det() / e.lambda_max : half_sum - radius;
    if (e.lambda_min > e.lambda_max) e.lambda_min = half_sum - radius;

    if (m.a12 == 0.0) {
        if (m.a11 >= m.a22) {
            e.v_max = {1.0, 0.0};
            e.v_min = {0.0, 1.0};
        } else {
            e.v_max = {0.0, 1.0};
            e.v_min = {1.0, 0.0};
        }
        return e;
    }

    // Pick the better conditioned of the two candidate eigenvector forms.
    Vec2 u = (half_diff >= 0.0) ? Vec2{half_diff + radius, m.a12}
                                : Vec2{m.a12, radius - half_diff};
    const double len = std::hypot(u[0], u[1]);
    e.v_max = {u[0] / len, u[1] / len};
    e.v_min = {-e.v_max[1], e.v_max[0]};
    return e;
}

inline double min_eigenvalue(const SymMatrix2& m) { return sym_eigen(m).lambda_min; }

// Relative positive-definiteness floor used throughout.
inline double pd_floor(const SymMatrix2& m) { return 1e-12 * (m.trace() + 1.0); }

// C such that C * M * C = I, for M symmetric positive definite.
inline SymMatrix2 sym2x2_inv_sqrt(const SymMatrix2& m) {
    const SymEigen2 e = sym_eigen(m);
    if (!(e.lambda_min > pd_floor(m)))
        throw SingularMatrixError(
            "matrix is not positive definite (smallest eigenvalue " +
                std::to_string(e.lambda_min) + ")",
            e.lambda_min);
    const double s_min = 1.0 / std::sqrt(e.lambda_min);
    const double s_max = 1.0 / std::sqrt(e.lambda_max);
    const Vec2& a = e.v_min;
    const Vec2& b = e.v_max;
    return {s_min * a[0] * a[0] + s_max * b[0] * b[0],
            s_min * a[0] * a[1] + s_max * b[0] * b[1],
            s_min * a[1] * a[1] + s_max * b[1] * b[1]};
}

// ---------------------------------------------------------------------------
// Normal distribution
// ---------------------------------------------------------------------------

inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

namespace detail {

// Acklam's rational approximation on the lower half (p <= 0.5), relative
// error below 1.15e-9, followed by one Newton step on the exact CDF.
inline double normal_quantile_lower(double p) {
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    static constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    const double density = normal_pdf(x);
    if (density > 0.0) x -= (normal_cdf(x) - p) / density;
    return x;
}

} // namespace detail

inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw Error(ErrorCode::domain, "normal_quantile: p must lie in (0,1)");
    if (p == 0.5) return 0.0;
    return (p < 0.5) ? detail::normal_quantile_lower(p)
                     : -detail::normal_quantile_lower(1.0 - p);
}

// Student-t quantile with the given degrees of freedom.
inline double student_t_quantile(double p, double dof) {
    if (!(p > 0.0 && p < 1.0) || !(dof > 0.0))
        throw Error(ErrorCode::domain, "student_t_quantile: invalid arguments");
    return boost::math::quantile(boost::math::students_t_distribution<double>(dof), p);
}

// ---------------------------------------------------------------------------
// Fisher-z interval for a correlation coefficient
// ---------------------------------------------------------------------------

inline Interval fisher_ci(double r, long sample_size, double alpha) {
    if (!(std::fabs(r) < 1.0))
        throw Error(ErrorCode::domain, "fisher_ci: |r| must be < 1");
    if (sample_size < 4)
        throw Error(ErrorCode::domain, "fisher_ci: sample size must be >= 4");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw Error(ErrorCode::domain, "fisher_ci: alpha must lie in (0,1)");
    const double z = std::atanh(r);
    const double half = normal_quantile(1.0 - alpha / 2.0) /
                        std::sqrt(static_cast<double>(sample_size - 3));
    return {std::tanh(z - half), std::tanh(z + half)};
}

} // namespace tlaw
