#pragma once

// One-dimensional Gaussian density, cumulative function and quantile.
// Tail values are computed through erfc so that min(F, 1-F) keeps full
// relative accuracy down to ~1e-300.

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gsk {

inline constexpr double inv_sqrt_2pi = 0.3989422804014326779399461;
inline constexpr double sqrt2 = 1.4142135623730950488016887;

/// Standard normal density (2*pi)^{-1/2} exp(-x^2/2).
inline double pdf(double x) {
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

/// Gaussian cumulative function k(x). Accepts +/-inf, mapping to 1/0.
inline double cdf(double x) {
    if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
    // erfc on the tail side keeps relative accuracy of min(F, 1-F).
    return 0.5 * std::erfc(-x / sqrt2);
}

/// Complementary cumulative 1 - k(x), accurate in the upper tail.
inline double cdf_bar(double x) {
    if (std::isinf(x)) return x > 0 ? 0.0 : 1.0;
    return 0.5 * std::erfc(x / sqrt2);
}

namespace detail {

// Rational initial guess for the normal quantile (Acklam's approximation,
// |rel err| < 1.15e-9), refined below by Newton steps on cdf.
inline double quantile_guess(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double q = p - 0.5, r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

} // namespace detail

/// Inverse of cdf on (0,1). Roundtrip |cdf(quantile(s)) - s| <= 1e-13
/// for s in [1e-12, 1-1e-12].
inline double quantile(double s) {
    if (!(s > 0.0 && s < 1.0))
        throw std::domain_error("gsk::quantile: argument must lie in (0,1)");
    double x = detail::quantile_guess(s);
    // Two Newton steps on cdf(x) = s, done on the smaller tail so the
    // correction (cdf(x)-s)/pdf(x) is free of cancellation.
    for (int i = 0; i < 2; ++i) {
        double f = (s <= 0.5) ? cdf(x) - s : (1.0 - s) - cdf_bar(x);
        double w = pdf(x);
        if (w <= 0.0) break;
        x -= f / w;
    }
    return x;
}

/// Gaussian measure of the interval (a, b); a may be -inf, b may be +inf.
/// Computed tail-side to avoid cancellation when both endpoints sit in
/// the same tail.
inline double interval_mass(double a, double b) {
    if (!(a < b))
        throw std::domain_error("gsk::interval_mass: requires a < b");
    if (a >= 0.0) return cdf_bar(a) - cdf_bar(b); // both in the upper tail
    if (b <= 0.0) return cdf(b) - cdf(a);         // both in the lower tail
    return 1.0 - cdf(a) - cdf_bar(b);             // straddles the origin
}

} // namespace gsk
