#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "wibp/error.hpp"
#include "wibp/io.hpp"
#include "wibp/montecarlo.hpp"
#include "wibp/numerics.hpp"

using namespace wibp;

namespace {

ModelParams make(double alpha, double beta, double c, WeightSpec w = WeightSpec::constant(1.0)) {
    ModelParams p;
    p.alpha = alpha;
    p.beta = beta;
    p.c = c;
    p.weights = w;
    return p;
}

SuiteOptions with_parallelism(unsigned k) {
    SuiteOptions o;
    o.parallelism = k;
    return o;
}

}  // namespace

TEST_CASE("map_replicates: ordered results for any thread count, lowest failure rethrown") {
    auto square = [](std::uint64_t i) { return i * i; };
    const auto one = map_replicates(100, 1, square);
    const auto four = map_replicates(100, 4, square);
    CHECK(one == four);
    CHECK(one[9] == 81);
    auto failing = [](std::uint64_t i) -> int {
        if (i == 7 || i == 30) throw std::runtime_error("boom " + std::to_string(i));
        return 0;
    };
    try {
        map_replicates(50, 3, failing);
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()) == "boom 7");
    }
}

TEST_CASE("run_replicates: independent of parallelism; reps = 1 matches run_trajectory") {
    const auto p = make(1, 0.25, 1, WeightSpec::two_point(1, 2, 0.5));
    ReplicateConfig cfg;
    cfg.n = 500;
    cfg.reps = 4;
    cfg.base_seed = 77;
    cfg.proxy_factor = 3;
    cfg.parallelism = 1;
    const auto a = run_replicates(p, cfg);
    cfg.parallelism = 4;
    const auto b = run_replicates(p, cfg);
    REQUIRE(a.size() == 4);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].stream_id == i);
        CHECK(a[i].row == b[i].row);
        CHECK(a[i].vn_scaled == b[i].vn_scaled);
        CHECK(a[i].z_proxy == b[i].z_proxy);
        CHECK(a[i].covered == b[i].covered);
        CHECK(*a[i].covered == (a[i].ci.lo <= *a[i].z_proxy && *a[i].z_proxy <= a[i].ci.hi));
    }

    cfg.reps = 1;
    cfg.proxy_factor = 0;
    const auto single = run_replicates(p, cfg);
    const auto traj = run_trajectory(p, 500, 77, 0, RecordPlan::at({}));
    CHECK(single[0].row == traj.rows.back());
}

TEST_CASE("run_replicates: mean of L_n matches the deterministic Poisson mean") {
    const auto p = make(1, 0.5, 1);
    ReplicateConfig cfg;
    cfg.n = 1000;
    cfg.reps = 1000;
    cfg.base_seed = 5;
    const auto samples = run_replicates(p, cfg);
    double mu = 0.0;
    for (int j = 0; j < 1000; ++j) mu += lambda_of(p, j);
    double mean = 0.0;
    for (const auto& s : samples) mean += static_cast<double>(s.row.dishes);
    mean /= 1000.0;
    CHECK(std::fabs(mean - mu) <= 3.0 * std::sqrt(mu / 1000.0));
    for (const auto& s : samples) {
        CHECK(std::isfinite(*s.ln_scaled));
        CHECK(std::isfinite(s.vn_scaled));
    }
}

TEST_CASE("ks_test: constructed samples") {
    const std::vector<double> one{0.0};
    CHECK(ks_test(one, normal_cdf).d == 0.5);
    for (int m : {1, 5, 40}) {
        std::vector<double> xs;
        for (int i = 1; i <= m; ++i) xs.push_back(normal_quantile((i - 0.5) / m));
        CHECK(std::fabs(ks_test(xs, normal_cdf).d - 0.5 / m) < 1e-12);
    }
    CHECK_THROWS_AS(ks_test(std::vector<double>{}, normal_cdf), DomainError);
}

TEST_CASE("chi_square_poisson: pooling keeps expected counts above the floor") {
    RngStream r(1, 1);
    std::vector<std::uint64_t> xs(5000);
    for (auto& x : xs) x = poisson_sample(4.0, r);
    const auto res = chi_square_poisson(xs, 4.0);
    CHECK(res.bins > 5);
    CHECK(res.p > 0.001);
    // A wrong mean is rejected.
    CHECK(chi_square_poisson(xs, 4.5).p < 1e-6);
}

TEST_CASE("sample_quantile: type 7") {
    CHECK(sample_quantile({1, 2, 3, 4}, 0.5) == 2.5);
    CHECK(sample_quantile({5}, 0.95) == 5);
    CHECK(sample_quantile({0, 10}, 0.95) == doctest::Approx(9.5));
}

TEST_CASE("suite_poisson_oracle: pass, L_1 ~ Poi(alpha), underpowered, inapplicable") {
    const auto p = make(2, 0.5, 1);
    const auto rep = suite_poisson_oracle(p, 200, 1000, SuiteOptions{});
    CHECK(rep.verdict == Verdict::pass);
    const auto first = suite_poisson_oracle(p, 1, 2000, SuiteOptions{});
    CHECK(first.statistics["oracle_mean"].get<double>() == 2.0);
    CHECK(first.verdict == Verdict::pass);
    CHECK(suite_poisson_oracle(p, 200, 10, SuiteOptions{}).verdict == Verdict::underpowered);
    CHECK_THROWS_AS(suite_poisson_oracle(make(2, 0.5, 1, WeightSpec::uniform(1, 2)), 100, 100, {}),
                    InapplicableSuite);
}

TEST_CASE("suite_slln_Ln: beta = 0 and weighted limits") {
    const auto zero = suite_slln_Ln(make(1, 0, 1), {100, 10000}, 100, SuiteOptions{});
    CHECK(zero.statistics["limit"].get<double>() == 1.0);
    const auto unif = make(1, 0.5, 1, WeightSpec::uniform(1, 2));
    const auto rep = suite_slln_Ln(unif, {100, 1000, 10000}, 100, SuiteOptions{});
    CHECK(std::fabs(rep.statistics["limit"].get<double>() - lambda_limit(unif)) == 0.0);
    CHECK(rep.verdict == Verdict::pass);
    CHECK_THROWS_AS(suite_slln_Ln(make(1, -1, 2), {100}, 50, {}), InapplicableSuite);
    CHECK_THROWS_AS(suite_slln_Ln(make(1, 0.5, 1), {100}, 50, {}, CountTarget::subset),
                    InapplicableSuite);
}

TEST_CASE("suite_clt_Kbar: inapplicable for beta >= 1/2 with varying weights") {
    CHECK_THROWS_AS(
        suite_clt_Kbar(make(1, 0.6, 1, WeightSpec::uniform(1, 2)), 100, 50, {}, KbarBranches{}),
        InapplicableSuite);
}

TEST_CASE("suite_cid_identity: exact cases pass, others report only") {
    CHECK(suite_cid_identity(make(1, 0, 1, WeightSpec::uniform(1, 2)), 1000, {}).verdict ==
          Verdict::pass);
    CHECK(suite_cid_identity(make(1, 0.5, 1), 1000, {}).verdict == Verdict::pass);
    const auto p = make(1, 0.5, 1, WeightSpec::uniform(1, 2));
    CHECK_THROWS_AS(suite_cid_identity(p, 100, {}), InapplicableSuite);
    const auto rep = suite_cid_identity(p, 100, {}, true);
    CHECK(rep.verdict == Verdict::report_only);
    CHECK(rep.statistics["max_rel_residual"].get<double>() > 1e-4);
}

TEST_CASE("suite_finite_buffet: pass at beta = -1, inapplicable at beta = 0") {
    const auto rep = suite_finite_buffet(make(1, -1, 2), 2000, 200, SuiteOptions{});
    CHECK(rep.verdict == Verdict::pass);
    const double ratio = rep.statistics["mean_exp_L_ratio"].get<double>();
    CHECK(ratio >= 0.95);
    CHECK(ratio <= 1.05);
    CHECK_THROWS_AS(suite_finite_buffet(make(1, 0, 2), 100, 50, {}), InapplicableSuite);
}

TEST_CASE("suites: reports are identical across parallelism and reruns") {
    const auto p = make(1, 0.25, 1, WeightSpec::two_point(1, 2, 0.5));
    const auto a = suite_clt_Kbar(p, 300, 60, with_parallelism(1), KbarBranches::automatic(p));
    const auto b = suite_clt_Kbar(p, 300, 60, with_parallelism(3), KbarBranches::automatic(p));
    CHECK(to_json(a).dump() == to_json(b).dump());
    const auto u = make(1, 0.5, 1);
    CHECK(to_json(suite_clt_Ln(u, 500, 60, with_parallelism(1))).dump() ==
          to_json(suite_clt_Ln(u, 500, 60, with_parallelism(2))).dump());
}

TEST_CASE("suites: every recorded statistic is finite") {
    const auto p = make(1, 0.25, 1, WeightSpec::two_point(1, 2, 0.5));
    const auto rep = suite_clt_Kbar(p, 400, 60, SuiteOptions{}, KbarBranches::automatic(p));
    std::function<void(const nlohmann::ordered_json&)> visit = [&](const nlohmann::ordered_json& j) {
        if (j.is_number_float()) CHECK(std::isfinite(j.get<double>()));
        if (j.is_structured())
            for (const auto& v : j) visit(v);
    };
    visit(rep.statistics);
    CHECK(rep.notes.size() >= 1);
}
