#include "wibp/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "wibp/error.hpp"

namespace wibp {

namespace {

// B_{2k} / (2k (2k−1)), k = 1..8.
constexpr std::array<long double, 8> kStirling = {
    1.0L / 12.0L,      -1.0L / 360.0L,         1.0L / 1260.0L, -1.0L / 1680.0L,
    1.0L / 1188.0L,    -691.0L / 360360.0L,    1.0L / 156.0L,  -3617.0L / 122400.0L,
};

constexpr long double kShiftTo = 15.0L;

// Σ_k c_k / z^{2k−1}; truncation error below 1e-20 for z >= 15.
long double stirling_tail(long double z) {
    const long double inv = 1.0L / z;
    const long double inv2 = inv * inv;
    long double sum = 0.0L;
    for (auto it = kStirling.rbegin(); it != kStirling.rend(); ++it) sum = sum * inv2 + *it;
    return sum * inv;
}

long double half_log_two_pi() { return 0.5L * std::log(2.0L * std::numbers::pi_v<long double>); }

}  // namespace

long double log_gamma_ext(long double x) {
    if (!(x > 0.0L) || !std::isfinite(x)) throw DomainError("log_gamma requires x > 0");
    long double shift_product = 1.0L;
    while (x < kShiftTo) {
        shift_product *= x;
        x += 1.0L;
    }
    return (x - 0.5L) * std::log(x) - x + half_log_two_pi() + stirling_tail(x) -
           std::log(shift_product);
}

double log_gamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("log_gamma requires x > 0");
    return static_cast<double>(log_gamma_ext(x));
}

long double log_gamma_ratio_excess(long double x, long double a, long double b) {
    if (!(x > 0.0L) || !(x + a > 0.0L) || !(x + b > 0.0L))
        throw DomainError("log_gamma_ratio_excess requires x > 0, x + a > 0, x + b > 0");
    if (a == b) return 0.0L;
    if (x >= 32.0L && x + a >= 16.0L && x + b >= 16.0L) {
        // (x+a−½)·ln(1+a/x) − (x+b−½)·ln(1+b/x) − (a−b) is O(1/x) built from O(1) terms.
        const long double body = (x + a - 0.5L) * std::log1p(a / x) -
                                 (x + b - 0.5L) * std::log1p(b / x) - (a - b);
        return body + (stirling_tail(x + a) - stirling_tail(x + b));
    }
    return log_gamma_ext(x + a) - log_gamma_ext(x + b) - (a - b) * std::log(x);
}

double h_of(double x, double beta) {
    if (!(x > std::max(0.0, -beta)) || !std::isfinite(x))
        throw DomainError("h_of requires x > max(0, -beta)");
    return static_cast<double>(std::expm1(log_gamma_ratio_excess(x, beta, 1.0L)));
}

std::uint64_t poisson_sample(double lambda, RngStream& rng) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw DomainError("poisson_sample requires a finite lambda >= 0");
    if (lambda == 0.0) return 0;

    if (lambda <= 10.0) {
        const double u = rng.uniform();
        std::uint64_t k = 0;
        double p = std::exp(-lambda);
        double cdf = p;
        // The cap only matters when u sits within rounding of 1.
        while (u > cdf && k < 200) {
            ++k;
            p *= lambda / static_cast<double>(k);
            cdf += p;
        }
        return k;
    }

    // Hörmann (1993), "The transformed rejection method for generating
    // Poisson random variables", algorithm PTRS.
    const double slam = std::sqrt(lambda);
    const double loglam = std::log(lambda);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = rng.uniform() - 0.5;
        const double v = rng.uniform();
        const double us = 0.5 - std::fabs(u);
        const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
        if (k < 0.0 || (us < 0.013 && v > us)) continue;
        const double lhs = std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b);
        const double rhs = -lambda + k * loglam - static_cast<double>(log_gamma_ext(k + 1.0L));
        if (lhs <= rhs) return static_cast<std::uint64_t>(k);
    }
}

double normal_sample(RngStream& rng) { return normal_quantile(rng.uniform()); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile requires 0 < p < 1");
    if (p == 0.5) return 0.0;

    // Work in the lower half; 1 − p is exact for p >= 0.5.
    const bool upper = p > 0.5;
    const double q = upper ? 1.0 - p : p;

    // Acklam's rational approximation (relative error < 1.2e-9).
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};

    double x;
    if (q < 0.02425) {
        const double t = std::sqrt(-2.0 * std::log(q));
        x = (((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5]) /
            ((((d[0] * t + d[1]) * t + d[2]) * t + d[3]) * t + 1.0);
    } else {
        const double t = q - 0.5;
        const double r = t * t;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * t /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }

    // One Halley step on Φ(x) − q.
    const double e = normal_cdf(x) - q;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);

    return upper ? -x : x;
}

double gamma_q(double a, double x) {
    if (!(a > 0.0) || !(x >= 0.0)) throw DomainError("gamma_q requires a > 0 and x >= 0");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    constexpr double tiny = std::numeric_limits<double>::min() / eps;
    const double log_prefactor = -x + a * std::log(x) - log_gamma(a);

    if (x < a + 1.0) {
        double ap = a;
        double term = 1.0 / a;
        double sum = term;
        for (int i = 0; i < 10000; ++i) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::fabs(term) < std::fabs(sum) * eps) break;
        }
        return std::clamp(1.0 - sum * std::exp(log_prefactor), 0.0, 1.0);
    }

    // Modified Lentz on the continued fraction for Γ(a, x).
    double bcf = x + 1.0 - a;
    double ccf = 1.0 / tiny;
    double dcf = 1.0 / bcf;
    double h = dcf;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        bcf += 2.0;
        dcf = an * dcf + bcf;
        if (std::fabs(dcf) < tiny) dcf = tiny;
        ccf = bcf + an / ccf;
        if (std::fabs(ccf) < tiny) ccf = tiny;
        dcf = 1.0 / dcf;
        const double delta = dcf * ccf;
        h *= delta;
        if (std::fabs(delta - 1.0) < eps) break;
    }
    return std::clamp(std::exp(log_prefactor) * h, 0.0, 1.0);
}

double chi_square_sf(double x, double dof) {
    if (!(dof > 0.0)) throw DomainError("chi_square_sf requires dof > 0");
    if (!(x > 0.0)) return 1.0;
    return gamma_q(0.5 * dof, 0.5 * x);
}

double kolmogorov_sf(double t) {
    if (!(t > 0.0)) return 1.0;
    constexpr double pi = std::numbers::pi;
    if (t < 1.18) {
        // Jacobi-transformed form converges fast for small t.
        const double w = -pi * pi / (8.0 * t * t);
        double sum = 0.0;
        for (int k = 1; k <= 7; k += 2) sum += std::exp(w * k * k);
        return std::clamp(1.0 - std::sqrt(2.0 * pi) / t * sum, 0.0, 1.0);
    }
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * t * t);
        sum += sign * term;
        if (term < 1e-18) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace wibp
