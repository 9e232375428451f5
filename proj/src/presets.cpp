#include "wibp/presets.hpp"

#include <chrono>
#include <functional>

namespace wibp {

namespace {

ModelParams make(double alpha, double beta, double c, WeightSpec w) {
    ModelParams p;
    p.alpha = alpha;
    p.beta = beta;
    p.c = c;
    p.weights = w;
    return p;
}

PresetRun timed(const char* label, const std::function<SuiteReport()>& run) {
    const auto start = std::chrono::steady_clock::now();
    SuiteReport report = run();
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    return {label, std::move(report), elapsed.count()};
}

}  // namespace

std::vector<PresetRun> acceptance_preset(const SuiteOptions& base) {
    SuiteOptions opts;
    opts.base_seed = base.base_seed;
    opts.parallelism = base.parallelism;

    const ModelParams oracle = make(2.0, 0.5, 1.0, WeightSpec::constant(1.0));
    const ModelParams standard = make(1.0, 0.5, 1.0, WeightSpec::constant(1.0));
    ModelParams standard_half = standard;
    standard_half.subset = IntervalSet({{0.0, 0.5}});
    const ModelParams weighted = make(1.0, 0.25, 1.0, WeightSpec::two_point(1.0, 2.0, 0.5));
    const ModelParams cid_uniform = make(1.0, 0.0, 1.0, WeightSpec::uniform(1.0, 2.0));
    const ModelParams finite = make(1.0, -1.0, 2.0, WeightSpec::constant(1.0));

    KbarBranches predictive;
    predictive.predictive = true;
    KbarBranches degenerate;
    degenerate.degenerate = true;
    degenerate.degenerate_horizons = {1000, 10000};
    KbarBranches limit;
    limit.limit = true;

    const std::vector<std::uint64_t> decades = {100, 1000, 10000};

    std::vector<PresetRun> runs;
    runs.push_back(timed("poisson_oracle",
                         [&] { return suite_poisson_oracle(oracle, 500, 2000, opts); }));
    runs.push_back(timed("slln", [&] { return suite_slln_Ln(standard, decades, 200, opts); }));
    runs.push_back(timed("clt_ln", [&] { return suite_clt_Ln(standard, 10000, 1000, opts); }));
    runs.push_back(timed("slln_subset", [&] {
        return suite_slln_Ln(standard_half, decades, 200, opts, CountTarget::subset);
    }));
    runs.push_back(timed("clt_ln_subset", [&] {
        return suite_clt_Ln(standard_half, 10000, 1000, opts, CountTarget::subset);
    }));
    runs.push_back(timed("clt_kbar_predictive",
                         [&] { return suite_clt_Kbar(weighted, 5000, 1000, opts, predictive); }));
    runs.push_back(timed("clt_kbar_degenerate",
                         [&] { return suite_clt_Kbar(standard, 10000, 500, opts, degenerate); }));
    runs.push_back(timed("clt_kbar_limit",
                         [&] { return suite_clt_Kbar(weighted, 5000, 500, opts, limit); }));
    runs.push_back(timed("cid_identity_beta0",
                         [&] { return suite_cid_identity(cid_uniform, 1000, opts); }));
    runs.push_back(timed("cid_identity_unit",
                         [&] { return suite_cid_identity(standard, 1000, opts); }));
    runs.push_back(timed("finite_buffet",
                         [&] { return suite_finite_buffet(finite, 2000, 500, opts); }));
    runs.push_back(timed("beta_hat", [&] {
        return suite_beta_hat(standard, {1000, 10000, 100000}, 100, opts);
    }));
    return runs;
}

}  // namespace wibp
