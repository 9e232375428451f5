#pragma once

#include <cstdint>

#include "wibp/rng.hpp"

namespace wibp {

/// ln Γ(x) for x > 0. Throws DomainError otherwise.
double log_gamma(double x);

/// Extended-precision ln Γ(x). Stirling series after an upward shift to
/// x >= 15, evaluated in long double.
long double log_gamma_ext(long double x);

/// ln Γ(x + a) − ln Γ(x + b) − (a − b)·ln x, for x > 0 and x + a, x + b > 0.
///
/// For large x the value is O(1/x) while the two log-gammas are O(x ln x);
/// this routine evaluates the difference without forming them, so the
/// relative accuracy holds all the way to x ~ 1e8 and beyond.
long double log_gamma_ratio_excess(long double x, long double a, long double b);

/// h(x) defined by Γ(x+β)/Γ(x+1) = x^{β−1}(1 + h(x)); requires x > max(0, −β).
double h_of(double x, double beta);

/// Poisson(lambda) variate. Inversion for lambda <= 10, transformed
/// rejection with squeeze (PTRS) above. lambda == 0 returns 0 without
/// consuming randomness.
std::uint64_t poisson_sample(double lambda, RngStream& rng);

inline bool bernoulli_sample(double p, RngStream& rng) { return rng.uniform() < p; }

/// Standard normal variate by inversion.
double normal_sample(RngStream& rng);

double normal_cdf(double x);

/// Φ^{-1}(p) for p in (0, 1).
double normal_quantile(double p);

/// Regularized upper incomplete gamma Q(a, x) = Γ(a, x)/Γ(a).
double gamma_q(double a, double x);

/// P(χ²_dof > x).
double chi_square_sf(double x, double dof);

/// Kolmogorov limiting survival function Q_KS(t) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²t²}.
double kolmogorov_sf(double t);

}  // namespace wibp
