#include "wibp/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wibp/error.hpp"
#include "wibp/numerics.hpp"

namespace wibp {

namespace {

void require_unit_beta(double beta, const char* what) {
    if (!(beta >= 0.0 && beta < 1.0))
        throw DomainError(std::string(what) + " requires beta in [0, 1)");
}

// {m2 / R̄² − 1} where m2 = scale·(1/n)ΣR². Values within compensated
// summation rounding of zero (a constant weight path) are returned as 0.
double weight_factor(const WeightMoments& w, std::uint64_t n, double scale) {
    const double mean_sq = w.sum_r_sq / static_cast<double>(n);
    const double ratio = scale * mean_sq / (w.r_bar * w.r_bar);
    const double factor = ratio - 1.0;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (std::fabs(factor) <= 16.0 * eps * scale) return 0.0;
    return std::max(factor, 0.0);
}

}  // namespace

double a_n(double beta, std::uint64_t n) {
    require_unit_beta(beta, "a_n");
    if (n < 2) throw DomainError("a_n requires n >= 2");
    const double nd = static_cast<double>(n);
    return beta == 0.0 ? std::log(nd) : std::pow(nd, beta);
}

double lambda_limit(const ModelParams& params) {
    require_unit_beta(params.beta, "lambda_limit");
    const double r = params.weights.mean();
    if (params.beta == 0.0) return params.alpha * params.c / r;
    const double gamma_ratio = std::exp(log_gamma(params.c + 1.0) - log_gamma(params.c + params.beta));
    return params.alpha * gamma_ratio / (params.beta * std::pow(r, 1.0 - params.beta));
}

std::optional<double> beta_hat(std::uint64_t dishes, std::uint64_t n) {
    if (n < 2) throw DomainError("beta_hat requires n >= 2");
    if (dishes == 0) return std::nullopt;
    return std::log(static_cast<double>(dishes)) / std::log(static_cast<double>(n));
}

WeightMoments weight_moments(const StatRow& row) {
    return {row.sum_r_sq, row.sum_r / static_cast<double>(row.n)};
}

KMoments k_moments(const StatRow& row) {
    return {static_cast<double>(row.sum_k_sq), row.kbar};
}

double k_empirical_variance(const KMoments& k, std::uint64_t n) {
    return std::max(k.sum_k_sq / static_cast<double>(n) - k.k_bar * k.k_bar, 0.0);
}

double sigma_hat_sq(const WeightMoments& w, const KMoments& k, std::uint64_t n) {
    if (n < 1) throw DomainError("sigma_hat_sq requires n >= 1");
    return weight_factor(w, n, 2.0) * k_empirical_variance(k, n);
}

double tau_hat_sq(const WeightMoments& w, const KMoments& k, std::uint64_t n) {
    if (n < 1) throw DomainError("tau_hat_sq requires n >= 1");
    return weight_factor(w, n, 1.0) * k_empirical_variance(k, n);
}

Interval confidence_interval(double k_bar, double sigma_hat, std::uint64_t n, double level) {
    if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0, 1)");
    if (!(sigma_hat >= 0.0)) throw DomainError("confidence_interval requires sigma_hat >= 0");
    if (n < 1) throw DomainError("confidence_interval requires n >= 1");
    const double u = normal_quantile(1.0 - (1.0 - level) / 2.0);
    const double half = u * sigma_hat / std::sqrt(static_cast<double>(n));
    return {k_bar - half, k_bar + half};
}

EstimateReport estimate(const StatRow& row, const ModelParams& params, double level) {
    if (row.n < 1) throw DomainError("estimate requires n >= 1");
    EstimateReport rep;
    rep.n = row.n;
    rep.dishes = row.dishes;
    rep.k_bar = row.kbar;
    if (row.n >= 2) {
        rep.beta_hat = beta_hat(row.dishes, row.n);
        if (params.beta >= 0.0 && params.beta < 1.0)
            rep.lambda_hat = static_cast<double>(row.dishes) / a_n(params.beta, row.n);
    }
    const auto w = weight_moments(row);
    const auto k = k_moments(row);
    rep.sigma_hat_sq = sigma_hat_sq(w, k, row.n);
    rep.tau_hat_sq = tau_hat_sq(w, k, row.n);
    rep.ci_level = level;
    const auto ci = confidence_interval(row.kbar, std::sqrt(rep.sigma_hat_sq), row.n, level);
    rep.ci_lo = ci.lo;
    rep.ci_hi = ci.hi;
    return rep;
}

}  // namespace wibp
