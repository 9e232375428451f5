#include "wibp/montecarlo.hpp"

#include <cmath>
#include <cstdlib>
#include <numeric>
#include <stdexcept>
#include <string>

#include "wibp/error.hpp"
#include "wibp/numerics.hpp"

namespace wibp {

unsigned default_parallelism() {
    if (const char* env = std::getenv("WIBP_PARALLELISM")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// ---------------------------------------------------------------------------
// Replicates
// ---------------------------------------------------------------------------

const StatRow& ReplicateSample::at(std::uint64_t horizon) const {
    for (const auto& r : horizons)
        if (r.n == horizon) return r;
    if (row.n == horizon) return row;
    throw std::out_of_range("replicate has no horizon " + std::to_string(horizon));
}

std::vector<ReplicateSample> run_replicates(const ModelParams& params, const ReplicateConfig& cfg) {
    if (cfg.reps < 1) throw DomainError("run_replicates requires reps >= 1");
    if (cfg.n < 1) throw DomainError("run_replicates requires n >= 1");
    validate_params(params);

    const bool unit_beta = params.beta >= 0.0 && params.beta < 1.0;
    const double lambda = unit_beta ? lambda_limit(params) : 0.0;
    const double subset_mass = params.subset ? params.subset->measure() : 0.0;
    const std::uint64_t proxy_n = cfg.proxy_factor * cfg.n;
    if (cfg.proxy_factor > 0 && proxy_n / cfg.proxy_factor != cfg.n)
        throw ResourceError("proxy horizon overflows");

    std::vector<std::uint64_t> recorded = cfg.horizons;
    recorded.push_back(cfg.n);
    if (cfg.proxy_factor > 0) recorded.push_back(proxy_n);
    const std::uint64_t n_max = *std::max_element(recorded.begin(), recorded.end());
    const RecordPlan plan = RecordPlan::at(recorded);

    return map_replicates(cfg.reps, cfg.parallelism, [&](std::uint64_t id) {
        const Trajectory traj = run_trajectory(params, n_max, cfg.base_seed, id, plan);
        ReplicateSample s;
        s.stream_id = id;
        s.n = cfg.n;
        s.row = traj.at(cfg.n);
        for (const auto h : cfg.horizons) s.horizons.push_back(traj.at(h));
        std::sort(s.horizons.begin(), s.horizons.end(),
                  [](const StatRow& a, const StatRow& b) { return a.n < b.n; });

        const double nd = static_cast<double>(cfg.n);
        if (unit_beta && cfg.n >= 2) {
            const double a = a_n(params.beta, cfg.n);
            s.ln_scaled = std::sqrt(a) * (static_cast<double>(s.row.dishes) / a - lambda);
            if (params.subset)
                s.lb_scaled = std::sqrt(a) * (static_cast<double>(s.row.dishes_in_subset) / a -
                                              subset_mass * lambda);
        }
        s.vn_scaled = std::sqrt(nd) * s.row.v;
        s.kbar = s.row.kbar;
        const auto w = weight_moments(s.row);
        const auto k = k_moments(s.row);
        s.sigma_hat = std::sqrt(sigma_hat_sq(w, k, cfg.n));
        s.tau_hat = std::sqrt(tau_hat_sq(w, k, cfg.n));
        if (s.tau_hat > 0.0) s.vn_studentized = s.vn_scaled / s.tau_hat;
        s.ci = confidence_interval(s.kbar, s.sigma_hat, cfg.n, cfg.ci_level);
        if (cfg.proxy_factor > 0) {
            s.z_proxy = traj.at(proxy_n).kbar;
            s.covered = s.ci.contains(*s.z_proxy);
            if (s.sigma_hat > 0.0)
                s.limit_studentized = std::sqrt(nd) * (s.kbar - *s.z_proxy) / s.sigma_hat;
        }
        return s;
    });
}

// ---------------------------------------------------------------------------
// Goodness of fit
// ---------------------------------------------------------------------------

KsResult ks_test(std::span<const double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw DomainError("ks_test requires at least one sample");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double m = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max({d, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
    }
    const double sqrt_m = std::sqrt(m);
    return {d, kolmogorov_sf((sqrt_m + 0.12 + 0.11 / sqrt_m) * d)};
}

ChiSquareResult chi_square_poisson(std::span<const std::uint64_t> counts, double mean,
                                   double min_expected) {
    if (counts.empty()) throw DomainError("chi_square_poisson requires samples");
    if (!(mean > 0.0)) throw DomainError("chi_square_poisson requires mean > 0");
    const double total = static_cast<double>(counts.size());
    const std::uint64_t observed_max = *std::max_element(counts.begin(), counts.end());
    const auto k_max = std::max<std::uint64_t>(
        observed_max, static_cast<std::uint64_t>(mean + 20.0 * std::sqrt(mean) + 20.0));

    // Cells [lower_k, next lower_k); the last cell is open-ended.
    std::vector<std::uint64_t> lower_k;
    std::vector<double> prob;
    double open_mass = 0.0;
    double cumulative = 0.0;
    std::uint64_t open_start = 0;
    const double log_mean = std::log(mean);
    for (std::uint64_t k = 0; k <= k_max; ++k) {
        const double pk = std::exp(-mean + static_cast<double>(k) * log_mean -
                                   static_cast<double>(log_gamma_ext(k + 1.0L)));
        open_mass += pk;
        cumulative += pk;
        if (open_mass * total >= min_expected) {
            lower_k.push_back(open_start);
            prob.push_back(open_mass);
            open_mass = 0.0;
            open_start = k + 1;
        }
    }
    // Upper tail beyond k_max plus any unclosed remainder joins the last cell.
    const double tail = std::max(0.0, 1.0 - cumulative) + open_mass;
    if (prob.empty()) {
        lower_k.push_back(0);
        prob.push_back(tail);
    } else {
        prob.back() += tail;
    }

    std::vector<double> observed(prob.size(), 0.0);
    for (const auto c : counts) {
        const auto it = std::upper_bound(lower_k.begin(), lower_k.end(), c);
        observed[static_cast<std::size_t>(it - lower_k.begin()) - 1] += 1.0;
    }

    ChiSquareResult out;
    out.bins = prob.size();
    for (std::size_t i = 0; i < prob.size(); ++i) {
        const double expected = total * prob[i];
        out.statistic += (observed[i] - expected) * (observed[i] - expected) / expected;
    }
    out.dof = static_cast<double>(out.bins) - 1.0;
    out.p = out.dof > 0.0 ? chi_square_sf(out.statistic, out.dof) : 1.0;
    return out;
}

double sample_quantile(std::vector<double> values, double prob) {
    if (values.empty()) throw DomainError("sample_quantile requires samples");
    if (!(prob >= 0.0 && prob <= 1.0)) throw DomainError("sample_quantile requires prob in [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::underpowered: return "underpowered";
        case Verdict::report_only: return "report_only";
    }
    return "fail";
}

KbarBranches KbarBranches::automatic(const ModelParams& params) {
    KbarBranches b;
    if (params.weights.is_constant()) {
        b.degenerate = true;
    } else {
        b.predictive = true;
        b.limit = true;
    }
    return b;
}

namespace {

struct Moments {
    double mean = 0.0;
    double variance = 0.0;  // unbiased
};

Moments moments(std::span<const double> xs) {
    Moments m;
    if (xs.empty()) return m;
    KahanSum sum;
    for (const double x : xs) sum += x;
    m.mean = sum.value() / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        KahanSum sq;
        for (const double x : xs) sq += (x - m.mean) * (x - m.mean);
        m.variance = sq.value() / static_cast<double>(xs.size() - 1);
    }
    return m;
}

bool all_finite(std::span<const double> xs) {
    return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

bool strictly_decreasing(std::span<const double> xs) {
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] < xs[i - 1])) return false;
    return true;
}

std::vector<std::uint64_t> sorted_horizons(std::vector<std::uint64_t> h, std::uint64_t min_n) {
    std::sort(h.begin(), h.end());
    h.erase(std::unique(h.begin(), h.end()), h.end());
    if (h.empty()) throw DomainError("at least one horizon is required");
    if (h.front() < min_n)
        throw DomainError("horizons must be >= " + std::to_string(min_n));
    return h;
}

SuiteReport make_report(const char* suite, const ModelParams& params, std::uint64_t n,
                        std::uint64_t reps, const SuiteOptions& opts) {
    SuiteReport rep;
    rep.suite = suite;
    rep.params = params;
    rep.n = n;
    rep.reps = reps;
    rep.base_seed = opts.base_seed;
    rep.seed = derive_seed(opts.base_seed, suite);
    return rep;
}

// Non-finite statistics always fail the suite.
void guard_finite(SuiteReport& rep, std::span<const double> xs, const char* what) {
    if (!all_finite(xs)) {
        rep.verdict = Verdict::fail;
        rep.notes.push_back(std::string("non-finite values in ") + what);
    }
}

std::uint64_t count_of(const StatRow& row, CountTarget target) {
    return target == CountTarget::subset ? row.dishes_in_subset : row.dishes;
}

double target_mass(const ModelParams& params, CountTarget target, const char* suite) {
    if (target == CountTarget::all_dishes) return 1.0;
    if (!params.subset) throw InapplicableSuite(std::string(suite) + " on a subset requires --subset");
    return params.subset->measure();
}

}  // namespace

SuiteReport suite_poisson_oracle(const ModelParams& params, std::uint64_t n, std::uint64_t reps,
                                 const SuiteOptions& opts) {
    validate_params(params);
    if (!params.weights.is_constant())
        throw InapplicableSuite("poisson_oracle requires constant weights");
    if (n < 1 || reps < 1) throw DomainError("poisson_oracle requires n >= 1 and reps >= 1");
    SuiteReport rep = make_report("poisson_oracle", params, n, reps, opts);

    // With constant weights Λ_0, ..., Λ_{n−1} are deterministic and
    // L_n ~ Poisson(Σ_j Λ_j). W is accumulated exactly as the sampler does.
    const LambdaCurve curve(params);
    const double r = params.weights.mean();
    KahanSum oracle;
    double w = 0.0;
    for (std::uint64_t j = 0; j < n; ++j) {
        oracle += curve(w);
        w += r;
    }
    const double mu = oracle.value();

    const auto counts = map_replicates(reps, opts.parallelism, [&](std::uint64_t id) {
        BuffetState state(params, RngStream(rep.seed, id));
        CustomerOutcome scratch;
        while (state.n() < n) step_into(state, params, scratch);
        return state.dish_count();
    });
    std::vector<double> as_double(counts.begin(), counts.end());
    const Moments m = moments(as_double);
    const auto chi = chi_square_poisson(counts, mu, opts.min_expected);
    const double mean_tol = 3.0 * std::sqrt(mu / static_cast<double>(reps));

    rep.statistics["oracle_mean"] = mu;
    rep.statistics["sample_mean"] = m.mean;
    rep.statistics["sample_variance"] = m.variance;
    rep.statistics["mean_deviation"] = std::fabs(m.mean - mu);
    rep.statistics["mean_tolerance"] = mean_tol;
    rep.statistics["chi_square"] = chi.statistic;
    rep.statistics["bins"] = chi.bins;
    rep.statistics["dof"] = chi.dof;
    rep.statistics["p_value"] = chi.p;
    rep.thresholds["p_min"] = opts.oracle_p_min;
    rep.thresholds["min_expected_per_bin"] = opts.min_expected;
    rep.thresholds["mean_sigmas"] = 3.0;
    rep.thresholds["min_reps"] = opts.oracle_min_reps;

    if (reps < opts.oracle_min_reps || chi.bins < 2) {
        rep.verdict = Verdict::underpowered;
        rep.notes.push_back("too few replicates for a chi-square verdict");
    } else {
        rep.verdict = chi.p > opts.oracle_p_min && std::fabs(m.mean - mu) <= mean_tol
                          ? Verdict::pass
                          : Verdict::fail;
    }
    return rep;
}

SuiteReport suite_slln_Ln(const ModelParams& params, std::vector<std::uint64_t> horizons,
                          std::uint64_t reps, const SuiteOptions& opts, CountTarget target) {
    const auto flags = validate_params(params);
    const char* name = target == CountTarget::subset ? "slln_subset" : "slln";
    if (!flags.slln_ok) throw InapplicableSuite(std::string(name) + " requires beta in [0, 1)");
    const double mass = target_mass(params, target, name);
    horizons = sorted_horizons(std::move(horizons), 2);
    SuiteReport rep = make_report(name, params, horizons.back(), reps, opts);

    const double limit = mass * lambda_limit(params);
    const auto trajs = map_replicates(reps, opts.parallelism, [&](std::uint64_t id) {
        return run_trajectory(params, horizons.back(), rep.seed, id, RecordPlan::at(horizons));
    });

    std::vector<double> deviations;
    auto table = nlohmann::ordered_json::array();
    bool finite = true;
    for (const auto h : horizons) {
        const double a = a_n(params.beta, h);
        std::vector<double> ratios;
        ratios.reserve(reps);
        for (const auto& t : trajs) ratios.push_back(static_cast<double>(count_of(t.at(h), target)) / a);
        finite = finite && all_finite(ratios);
        const Moments m = moments(ratios);
        const double dev = std::fabs(m.mean - limit);
        deviations.push_back(dev);
        table.push_back({{"n", h},
                         {"mean_ratio", m.mean},
                         {"sd_ratio", std::sqrt(m.variance)},
                         {"abs_deviation", dev},
                         {"rel_deviation", dev / limit}});
    }
    const double tol = params.beta > 0.0 ? opts.slln_tol_positive_beta : opts.slln_tol_zero_beta;
    const double final_rel = deviations.back() / limit;
    rep.statistics["limit"] = limit;
    rep.statistics["horizons"] = table;
    rep.statistics["deviation_decreasing"] = strictly_decreasing(deviations);
    rep.statistics["final_rel_deviation"] = final_rel;
    rep.thresholds["final_rel_deviation_max"] = tol;

    if (reps < opts.min_reps) {
        rep.verdict = Verdict::underpowered;
    } else {
        rep.verdict = strictly_decreasing(deviations) && final_rel <= tol ? Verdict::pass : Verdict::fail;
    }
    if (!finite) {
        rep.verdict = Verdict::fail;
        rep.notes.push_back("non-finite values in L_n / a_n");
    }
    return rep;
}

SuiteReport suite_clt_Ln(const ModelParams& params, std::uint64_t n, std::uint64_t reps,
                         const SuiteOptions& opts, CountTarget target) {
    const auto flags = validate_params(params);
    const char* name = target == CountTarget::subset ? "clt_ln_subset" : "clt_ln";
    if (!flags.clt_ln_ok) throw InapplicableSuite(std::string(name) + " requires beta in [0, 1)");
    const double mass = target_mass(params, target, name);
    if (n < 2) throw DomainError("clt_ln requires n >= 2");
    SuiteReport rep = make_report(name, params, n, reps, opts);
    if (params.beta == 0.0)
        rep.notes.push_back("beta = 0: log n norming converges slowly; verdict is indicative only");

    ReplicateConfig cfg;
    cfg.n = n;
    cfg.reps = reps;
    cfg.base_seed = rep.seed;
    cfg.parallelism = opts.parallelism;
    const auto samples = run_replicates(params, cfg);

    const double variance = mass * lambda_limit(params);
    std::vector<double> scaled;
    scaled.reserve(reps);
    for (const auto& s : samples)
        scaled.push_back(target == CountTarget::subset ? *s.lb_scaled : *s.ln_scaled);
    const Moments m = moments(scaled);
    const double sd = std::sqrt(variance);
    const auto ks = ks_test(scaled, [sd](double x) { return normal_cdf(x / sd); });
    const double var_rel = std::fabs(m.variance / variance - 1.0);

    rep.statistics["limit_variance"] = variance;
    rep.statistics["sample_mean"] = m.mean;
    rep.statistics["sample_variance"] = m.variance;
    rep.statistics["variance_rel_deviation"] = var_rel;
    rep.statistics["ks_d"] = ks.d;
    rep.statistics["ks_p"] = ks.p;
    if (params.weights.is_constant()) {
        // Diagnostic only: with a deterministic Λ path, E L_n = Σ_{j<n} Λ_j
        // exactly, so the finite-n offset of the centering is known.
        const LambdaCurve curve(params);
        KahanSum mu;
        double w = 0.0;
        for (std::uint64_t j = 0; j < n; ++j) {
            mu += curve(w);
            w += params.weights.mean();
        }
        const double a = a_n(params.beta, n);
        const double offset = (mass * mu.value() - variance * a) / std::sqrt(a);
        std::vector<double> recentred(scaled);
        for (auto& x : recentred) x -= offset;
        const auto ks_rc = ks_test(recentred, [sd](double x) { return normal_cdf(x / sd); });
        rep.statistics["exact_centering_offset"] = offset;
        rep.statistics["ks_p_exact_centering"] = ks_rc.p;
    }
    rep.thresholds["ks_p_min"] = opts.ks_p_min;
    rep.thresholds["variance_rel_max"] = opts.clt_variance_tol;

    if (reps < opts.min_reps) {
        rep.verdict = Verdict::underpowered;
    } else {
        rep.verdict = ks.p > opts.ks_p_min && var_rel <= opts.clt_variance_tol ? Verdict::pass
                                                                                : Verdict::fail;
    }
    guard_finite(rep, scaled, "scaled L_n");
    return rep;
}

SuiteReport suite_clt_Kbar(const ModelParams& params, std::uint64_t n, std::uint64_t reps,
                           const SuiteOptions& opts, const KbarBranches& branches) {
    const auto flags = validate_params(params);
    if (!flags.clt_kbar_ok && !flags.clt_kbar_standard_ok)
        throw InapplicableSuite("clt_kbar requires beta < 1/2, or R = 1 with beta < 1");
    if (n < 2) throw DomainError("clt_kbar requires n >= 2");
    if (!branches.predictive && !branches.limit && !branches.degenerate)
        throw DomainError("clt_kbar: no branch selected");
    SuiteReport rep = make_report("clt_kbar", params, n, reps, opts);

    std::vector<std::uint64_t> degenerate_h = branches.degenerate_horizons;
    if (branches.degenerate) {
        if (degenerate_h.empty()) degenerate_h = {std::max<std::uint64_t>(n / 10, 2), n};
        degenerate_h = sorted_horizons(std::move(degenerate_h), 2);
        if (degenerate_h.size() < 2)
            throw DomainError("clt_kbar degenerate branch needs two distinct horizons");
    }

    ReplicateConfig cfg;
    cfg.n = n;
    cfg.reps = reps;
    cfg.base_seed = rep.seed;
    cfg.parallelism = opts.parallelism;
    cfg.ci_level = opts.ci_level;
    cfg.proxy_factor = branches.limit ? opts.proxy_factor : 0;
    cfg.horizons = degenerate_h;
    if (branches.limit && opts.proxy_factor < 2)
        throw DomainError("clt_kbar limit branch requires proxy_factor >= 2");
    const auto samples = run_replicates(params, cfg);

    bool any_fail = false;
    bool any_underpowered = reps < opts.min_reps;
    std::vector<double> all_stats;

    if (branches.predictive) {
        std::vector<double> stud;
        for (const auto& s : samples)
            if (s.vn_studentized) stud.push_back(*s.vn_studentized);
        const std::size_t degenerate_tau = samples.size() - stud.size();
        nlohmann::ordered_json b;
        b["tau_hat_zero_count"] = degenerate_tau;
        if (stud.size() < opts.min_reps || degenerate_tau * 20 > samples.size()) {
            any_underpowered = true;
            rep.notes.push_back("predictive branch: tau_hat vanishes on too many replicates");
        } else {
            const Moments m = moments(stud);
            const auto ks = ks_test(stud, normal_cdf);
            b["sample_mean"] = m.mean;
            b["sample_variance"] = m.variance;
            b["ks_d"] = ks.d;
            b["ks_p"] = ks.p;
            if (!(ks.p > opts.ks_p_min)) any_fail = true;
            all_stats.insert(all_stats.end(), stud.begin(), stud.end());
        }
        rep.statistics["predictive"] = b;
    }

    if (branches.limit) {
        std::vector<double> stud;
        std::size_t covered = 0;
        for (const auto& s : samples) {
            if (s.limit_studentized) stud.push_back(*s.limit_studentized);
            if (s.covered.value_or(false)) ++covered;
        }
        const double coverage = static_cast<double>(covered) / static_cast<double>(samples.size());
        nlohmann::ordered_json b;
        b["proxy_n"] = opts.proxy_factor * n;
        b["coverage"] = coverage;
        b["sigma_hat_zero_count"] = samples.size() - stud.size();
        if (stud.size() < opts.min_reps) {
            any_underpowered = true;
        } else {
            const Moments m = moments(stud);
            const auto ks = ks_test(stud, normal_cdf);
            b["sample_mean"] = m.mean;
            b["sample_variance"] = m.variance;
            b["ks_d"] = ks.d;
            b["ks_p"] = ks.p;
            if (!(ks.p > opts.ks_p_min)) any_fail = true;
            all_stats.insert(all_stats.end(), stud.begin(), stud.end());
        }
        if (!(coverage >= opts.coverage_lo && coverage <= opts.coverage_hi)) any_fail = true;
        rep.statistics["limit"] = b;
    }

    if (branches.degenerate) {
        auto table = nlohmann::ordered_json::array();
        std::vector<double> quantiles;
        for (const auto h : degenerate_h) {
            std::vector<double> abs_scaled;
            for (const auto& s : samples) {
                const StatRow& row = s.at(h);
                abs_scaled.push_back(std::fabs(std::sqrt(static_cast<double>(h)) * row.v));
            }
            all_stats.insert(all_stats.end(), abs_scaled.begin(), abs_scaled.end());
            const double q = sample_quantile(abs_scaled, opts.degenerate_quantile);
            quantiles.push_back(q);
            table.push_back({{"n", h}, {"abs_sqrt_n_vn_quantile", q}});
        }
        const bool shrinking = strictly_decreasing(quantiles);
        nlohmann::ordered_json b;
        b["horizons"] = table;
        b["quantile_decreasing"] = shrinking;
        if (!shrinking) any_fail = true;
        rep.statistics["degenerate"] = b;
        if (!params.weights.is_constant())
            rep.notes.push_back("degenerate branch run with non-constant weights");
    }

    rep.thresholds["ks_p_min"] = opts.ks_p_min;
    if (branches.limit) {
        rep.thresholds["proxy_factor"] = opts.proxy_factor;
        rep.thresholds["ci_level"] = opts.ci_level;
        rep.thresholds["coverage_lo"] = opts.coverage_lo;
        rep.thresholds["coverage_hi"] = opts.coverage_hi;
    }
    if (branches.degenerate) rep.thresholds["degenerate_quantile"] = opts.degenerate_quantile;
    if (branches.predictive)
        rep.notes.push_back("tau_hat is a plug-in for tau with q in place of 2q in the sigma_hat factor");

    rep.verdict = any_fail ? Verdict::fail : any_underpowered ? Verdict::underpowered : Verdict::pass;
    guard_finite(rep, all_stats, "K-bar statistics");
    return rep;
}

SuiteReport suite_cid_identity(const ModelParams& params, std::uint64_t n,
                               const SuiteOptions& opts, bool report_only) {
    validate_params(params);
    const bool exact_case = params.beta == 0.0 || params.weights.is_unit();
    if (!exact_case && !report_only)
        throw InapplicableSuite("cid_identity requires beta = 0 or R = 1");
    if (n < 1) throw DomainError("cid_identity requires n >= 1");
    SuiteReport rep = make_report("cid_identity", params, n, 1, opts);

    BuffetState state(params, RngStream(rep.seed, 0));
    CustomerOutcome out;
    double max_residual = 0.0;
    std::uint64_t worst_step = 0;
    while (state.n() < n) {
        const double lambda_before = state.lambda();
        step_into(state, params, out);
        const double predicted =
            lambda_before * (1.0 - (out.weight - params.beta) / (params.c + state.total_weight()));
        const double residual = std::fabs(state.lambda() - predicted) / state.lambda();
        if (!(residual <= max_residual)) {
            max_residual = residual;
            worst_step = state.n();
        }
    }
    rep.statistics["max_rel_residual"] = max_residual;
    rep.statistics["worst_step"] = worst_step;
    rep.statistics["exact_case"] = exact_case;
    rep.thresholds["max_rel_residual"] = opts.cid_tol;
    if (!exact_case) {
        rep.verdict = Verdict::report_only;
        rep.notes.push_back("identity not expected to hold outside beta = 0 or R = 1");
    } else {
        rep.verdict = max_residual <= opts.cid_tol ? Verdict::pass : Verdict::fail;
    }
    return rep;
}

SuiteReport suite_finite_buffet(const ModelParams& params, std::uint64_t n, std::uint64_t reps,
                                const SuiteOptions& opts) {
    validate_params(params);
    if (!(params.beta < 0.0)) throw InapplicableSuite("finite_buffet requires beta < 0");
    if (n < 2) throw DomainError("finite_buffet requires n >= 2");
    SuiteReport rep = make_report("finite_buffet", params, n, reps, opts);
    const std::uint64_t half = n / 2;

    const auto trajs = map_replicates(reps, opts.parallelism, [&](std::uint64_t id) {
        return run_trajectory(params, n, rep.seed, id, RecordPlan::at({half, n}));
    });
    std::size_t settled = 0;
    std::vector<double> exp_half;
    std::vector<double> exp_full;
    for (const auto& t : trajs) {
        const auto l_half = t.at(half).dishes;
        const auto l_full = t.at(n).dishes;
        if (l_half == l_full) ++settled;
        exp_half.push_back(std::exp(static_cast<double>(l_half)));
        exp_full.push_back(std::exp(static_cast<double>(l_full)));
    }
    const double fraction = static_cast<double>(settled) / static_cast<double>(reps);
    const double mean_half = moments(exp_half).mean;
    const double mean_full = moments(exp_full).mean;
    rep.statistics["half_n"] = half;
    rep.statistics["settled_fraction"] = fraction;
    rep.statistics["mean_exp_L_half"] = mean_half;
    rep.statistics["mean_exp_L_full"] = mean_full;
    rep.statistics["mean_exp_L_ratio"] = mean_full / mean_half;
    rep.thresholds["settled_fraction_min"] = opts.finite_fraction_min;

    if (reps < opts.min_reps) {
        rep.verdict = Verdict::underpowered;
    } else {
        rep.verdict = fraction >= opts.finite_fraction_min ? Verdict::pass : Verdict::fail;
    }
    guard_finite(rep, exp_full, "exp(L_n)");
    return rep;
}

SuiteReport suite_beta_hat(const ModelParams& params, std::vector<std::uint64_t> horizons,
                           std::uint64_t reps, const SuiteOptions& opts) {
    const auto flags = validate_params(params);
    if (!flags.slln_ok) throw InapplicableSuite("beta_hat requires beta in [0, 1)");
    horizons = sorted_horizons(std::move(horizons), 2);
    SuiteReport rep = make_report("beta_hat", params, horizons.back(), reps, opts);

    const auto trajs = map_replicates(reps, opts.parallelism, [&](std::uint64_t id) {
        return run_trajectory(params, horizons.back(), rep.seed, id, RecordPlan::at(horizons));
    });
    auto table = nlohmann::ordered_json::array();
    std::vector<double> deviations;
    std::vector<double> all;
    for (const auto h : horizons) {
        std::vector<double> values;
        std::size_t absent = 0;
        for (const auto& t : trajs) {
            if (const auto b = beta_hat(t.at(h).dishes, h))
                values.push_back(*b);
            else
                ++absent;
        }
        const double mean = values.empty() ? 0.0 : moments(values).mean;
        const double dev = std::fabs(mean - params.beta);
        deviations.push_back(dev);
        all.insert(all.end(), values.begin(), values.end());
        table.push_back({{"n", h}, {"mean_beta_hat", mean}, {"abs_deviation", dev}, {"absent", absent}});
    }
    rep.statistics["horizons"] = table;
    rep.statistics["deviation_decreasing"] = strictly_decreasing(deviations);
    rep.statistics["final_abs_deviation"] = deviations.back();
    rep.thresholds["final_abs_deviation_max"] = opts.beta_hat_tol;
    if (reps < opts.min_reps) {
        rep.verdict = Verdict::underpowered;
    } else {
        rep.verdict = strictly_decreasing(deviations) && deviations.back() <= opts.beta_hat_tol
                          ? Verdict::pass
                          : Verdict::fail;
    }
    guard_finite(rep, all, "beta_hat");
    return rep;
}

}  // namespace wibp
