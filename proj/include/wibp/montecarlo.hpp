#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "json.hpp"
#include "wibp/estimators.hpp"
#include "wibp/model.hpp"
#include "wibp/stats.hpp"

namespace wibp {

/// WIBP_PARALLELISM if set to a positive integer, else the hardware thread count.
unsigned default_parallelism();

/// Evaluates fn(i) for i in [0, reps) on `parallelism` threads (0 = default)
/// and returns the results ordered by i. Work is handed out dynamically but
/// each result depends only on its index, so the output does not depend on
/// the thread count. The exception of the lowest failing index is rethrown.
template <class Fn>
auto map_replicates(std::uint64_t reps, unsigned parallelism, Fn&& fn)
    -> std::vector<std::invoke_result_t<Fn&, std::uint64_t>> {
    using T = std::invoke_result_t<Fn&, std::uint64_t>;
    std::vector<std::optional<T>> slots(reps);
    std::vector<std::exception_ptr> errors(reps);
    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::uint64_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= reps) return;
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned wanted = parallelism == 0 ? default_parallelism() : parallelism;
    const auto threads = static_cast<unsigned>(std::min<std::uint64_t>(wanted, reps));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::vector<T> out;
    out.reserve(reps);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

// ---------------------------------------------------------------------------
// Replicates
// ---------------------------------------------------------------------------

struct ReplicateConfig {
    std::uint64_t n = 1000;
    std::uint64_t reps = 100;
    std::uint64_t base_seed = 1;
    unsigned parallelism = 0;
    /// Run each replicate on to N = proxy_factor·n and use K̄_N as the proxy
    /// for the limit Z. 0 disables the proxy.
    std::uint64_t proxy_factor = 0;
    double ci_level = 0.95;
    /// Extra horizons recorded along each trajectory.
    std::vector<std::uint64_t> horizons;
};

struct ReplicateSample {
    std::uint64_t stream_id = 0;
    std::uint64_t n = 0;
    StatRow row;                    ///< statistics at n
    std::vector<StatRow> horizons;  ///< rows at the configured horizons, ascending

    std::optional<double> ln_scaled;  ///< √a_n (L_n/a_n − λ)
    std::optional<double> lb_scaled;  ///< √a_n (L_n(B)/a_n − m(B)λ)
    double vn_scaled = 0.0;           ///< √n V_n
    std::optional<double> vn_studentized;  ///< √n V_n / τ̂_n, when τ̂_n > 0
    double kbar = 0.0;
    double sigma_hat = 0.0;
    double tau_hat = 0.0;
    Interval ci{0.0, 0.0};
    std::optional<double> z_proxy;
    std::optional<double> limit_studentized;  ///< √n (K̄_n − z_proxy) / σ̂_n
    std::optional<bool> covered;

    const StatRow& at(std::uint64_t horizon) const;
};

/// Replicate i runs on stream_id = i of base_seed.
std::vector<ReplicateSample> run_replicates(const ModelParams& params, const ReplicateConfig& cfg);

// ---------------------------------------------------------------------------
// Goodness of fit
// ---------------------------------------------------------------------------

struct KsResult {
    double d;
    double p;
};

/// One-sample Kolmogorov–Smirnov test; p from the Kolmogorov limit law with
/// Stephens' small-sample correction (√m + 0.12 + 0.11/√m)·D.
KsResult ks_test(std::span<const double> samples, const std::function<double(double)>& cdf);

struct ChiSquareResult {
    double statistic = 0.0;
    std::size_t bins = 0;
    double dof = 0.0;
    double p = 1.0;
};

/// χ² fit of nonnegative counts to Poisson(mean); adjacent cells are pooled
/// until each expected count reaches min_expected, the last cell is open-ended.
ChiSquareResult chi_square_poisson(std::span<const std::uint64_t> counts, double mean,
                                   double min_expected = 5.0);

/// Linear-interpolation sample quantile (type 7).
double sample_quantile(std::vector<double> values, double prob);

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

enum class Verdict { pass, fail, underpowered, report_only };

const char* to_string(Verdict v);

struct SuiteReport {
    std::string suite;
    ModelParams params;
    std::uint64_t n = 0;
    std::uint64_t reps = 0;
    std::uint64_t base_seed = 0;
    std::uint64_t seed = 0;  ///< derived per-suite seed actually used
    nlohmann::ordered_json statistics = nlohmann::ordered_json::object();
    nlohmann::ordered_json thresholds = nlohmann::ordered_json::object();
    Verdict verdict = Verdict::fail;
    std::vector<std::string> notes;
};

struct SuiteOptions {
    std::uint64_t base_seed = 1;
    unsigned parallelism = 0;

    double oracle_p_min = 0.001;
    double ks_p_min = 0.01;
    double min_expected = 5.0;
    std::uint64_t oracle_min_reps = 50;
    std::uint64_t min_reps = 20;
    double slln_tol_positive_beta = 0.10;
    double slln_tol_zero_beta = 0.25;
    double clt_variance_tol = 0.15;
    std::uint64_t proxy_factor = 10;
    double ci_level = 0.95;
    double coverage_lo = 0.90;
    double coverage_hi = 0.98;
    double degenerate_quantile = 0.95;
    double cid_tol = 1e-10;
    double finite_fraction_min = 0.99;
    double beta_hat_tol = 0.15;
};

/// Count targeted by the L_n suites.
enum class CountTarget { all_dishes, subset };

struct KbarBranches {
    bool predictive = false;  ///< √n V_n / τ̂_n against N(0, 1)
    bool limit = false;       ///< √n (K̄_n − z_proxy) / σ̂_n against N(0, 1), plus CI coverage
    bool degenerate = false;  ///< upper quantile of |√n V_n| shrinks along horizons
    std::vector<std::uint64_t> degenerate_horizons;  ///< defaults to {n/10, n}

    /// Constant weights: degenerate branch; otherwise predictive and limit.
    static KbarBranches automatic(const ModelParams& params);
};

SuiteReport suite_poisson_oracle(const ModelParams& params, std::uint64_t n, std::uint64_t reps,
                                 const SuiteOptions& opts);

SuiteReport suite_slln_Ln(const ModelParams& params, std::vector<std::uint64_t> horizons,
                          std::uint64_t reps, const SuiteOptions& opts,
                          CountTarget target = CountTarget::all_dishes);

SuiteReport suite_clt_Ln(const ModelParams& params, std::uint64_t n, std::uint64_t reps,
                         const SuiteOptions& opts, CountTarget target = CountTarget::all_dishes);

SuiteReport suite_clt_Kbar(const ModelParams& params, std::uint64_t n, std::uint64_t reps,
                           const SuiteOptions& opts, const KbarBranches& branches);

/// Residual of Λ_{n+1} = Λ_n (1 − (R_{n+1} − β)/(c + Σ_{i≤n+1} R_i)) along one
/// trajectory. Outside β = 0 or R ≡ 1 the identity need not hold: the suite
/// throws InapplicableSuite unless report_only is set.
SuiteReport suite_cid_identity(const ModelParams& params, std::uint64_t n,
                               const SuiteOptions& opts, bool report_only = false);

SuiteReport suite_finite_buffet(const ModelParams& params, std::uint64_t n, std::uint64_t reps,
                                const SuiteOptions& opts);

SuiteReport suite_beta_hat(const ModelParams& params, std::vector<std::uint64_t> horizons,
                           std::uint64_t reps, const SuiteOptions& opts);

}  // namespace wibp
