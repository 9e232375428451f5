#pragma once

#include <cstdint>
#include <optional>

#include "wibp/model.hpp"
#include "wibp/stats.hpp"

namespace wibp {

/// Norming sequence: log n for β = 0, n^β for β in (0, 1).
double a_n(double beta, std::uint64_t n);

/// λ(β) = αc/r for β = 0, α Γ(c+1)/Γ(c+β) / (β r^{1−β}) for β in (0, 1).
double lambda_limit(const ModelParams& params);

/// log L_n / log n; empty when L_n = 0.
std::optional<double> beta_hat(std::uint64_t dishes, std::uint64_t n);

struct WeightMoments {
    double sum_r_sq;  ///< Σ R_i²
    double r_bar;     ///< R̄_n
};

struct KMoments {
    double sum_k_sq;  ///< Σ K_i²
    double k_bar;     ///< K̄_n
};

WeightMoments weight_moments(const StatRow& row);
KMoments k_moments(const StatRow& row);

/// (1/n) Σ K_i² − K̄_n², clamped at 0.
double k_empirical_variance(const KMoments& k, std::uint64_t n);

/// σ̂² = {(2/n)ΣR_i²/R̄² − 1}·{(1/n)ΣK_i² − K̄²}.
double sigma_hat_sq(const WeightMoments& w, const KMoments& k, std::uint64_t n);

/// τ̂² = {(1/n)ΣR_i²/R̄² − 1}·{(1/n)ΣK_i² − K̄²}; plug-in for τ² with q̂ in place of 2q̂.
double tau_hat_sq(const WeightMoments& w, const KMoments& k, std::uint64_t n);

struct Interval {
    double lo;
    double hi;
    bool contains(double x) const noexcept { return lo <= x && x <= hi; }
};

/// K̄ ± u_a σ̂ / √n with u_a = Φ^{-1}(1 − (1 − level)/2).
Interval confidence_interval(double k_bar, double sigma_hat, std::uint64_t n, double level);

struct EstimateReport {
    std::uint64_t n = 0;
    std::uint64_t dishes = 0;
    double k_bar = 0.0;
    std::optional<double> beta_hat;
    /// L_n / a_n(β) at the model β; empty outside β in [0, 1) or for n < 2.
    std::optional<double> lambda_hat;
    double sigma_hat_sq = 0.0;
    double tau_hat_sq = 0.0;
    double ci_level = 0.95;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

EstimateReport estimate(const StatRow& row, const ModelParams& params, double level);

}  // namespace wibp
