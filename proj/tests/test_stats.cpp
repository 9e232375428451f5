#include <cmath>
#include <vector>

#include "doctest.h"
#include "wibp/estimators.hpp"
#include "wibp/model.hpp"
#include "wibp/montecarlo.hpp"
#include "wibp/stats.hpp"

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

}  // namespace

TEST_CASE("z_of, g_of and the second moment on the empty buffet") {
    const auto p = make(2.5, 0.5, 1);
    BuffetState s(p, RngStream(1, 0));
    CHECK(z_of(s, p) == 2.5);
    CHECK(g_of(s, p) == 0.0);
    CHECK(conditional_second_moment(s, p) == 2.5 + 2.5 * 2.5);
}

TEST_CASE("z_of after the first customer, beta = 0, unit weights") {
    const auto p = make(1.7, 0, 1.3);
    for (std::uint64_t seed = 1; seed < 20; ++seed) {
        BuffetState s(p, RngStream(seed, 0));
        const auto out = step(s, p);
        const double k = static_cast<double>(out.dishes_tried);
        const double expect = p.c * p.alpha / (p.c + 1) + k / (1 + p.c);
        CHECK(std::fabs(z_of(s, p) - expect) < 1e-14);
    }
}

TEST_CASE("g_of: one unit dish with W = 1, c = 1, beta = 0 is 1/4") {
    const auto p = make(1, 0, 1);
    for (std::uint64_t seed = 1;; ++seed) {
        BuffetState s(p, RngStream(seed, 0));
        step(s, p);
        if (s.dish_count() != 1) continue;
        CHECK(g_of(s, p) == 0.25);
        CHECK(conditional_second_moment(s, p) == doctest::Approx(z_of(s, p) * (1 + z_of(s, p)) - 0.25));
        break;
    }
}

TEST_CASE("incremental Z agrees with the dish table; V = Kbar - Z; moments nonnegative") {
    for (const auto& p : {make(2, 0.5, 1), make(1, 0.25, 1, WeightSpec::two_point(1, 2, 0.5)),
                          make(1.5, 0, 0.5, WeightSpec::uniform(1, 2))}) {
        BuffetState s(p, RngStream(12, 1));
        std::uint64_t sum_k = 0;
        for (int i = 1; i <= 20000; ++i) {
            sum_k += step(s, p).dishes_tried;
            if (i % 997 != 0) continue;
            const double z = z_of(s, p);
            CHECK(std::fabs(z - z_from_dishes(s, p)) <= 1e-9 * z);
            const auto row = snapshot(s, p);
            CHECK(row.kbar == static_cast<double>(sum_k) / i);
            CHECK(row.v == row.kbar - row.z);
            CHECK(row.z >= row.lambda);
            CHECK(row.lambda >= 0.0);
            CHECK(row.g >= 0.0);
            CHECK(k_empirical_variance(k_moments(row), row.n) >= 0.0);
        }
    }
}

TEST_CASE("l_of_B: whole interval, empty set, half interval") {
    auto p = make(5, 0.5, 1);
    BuffetState s(p, RngStream(3, 3));
    for (int i = 0; i < 500; ++i) step(s, p);
    CHECK(l_of_B(s, IntervalSet::whole()) == s.dish_count());
    CHECK(l_of_B(s, IntervalSet()) == 0);
    const auto lo = l_of_B(s, IntervalSet({{0.0, 0.5}}));
    const auto hi = l_of_B(s, IntervalSet({{0.5, 1.0}}));
    CHECK(lo + hi == s.dish_count());
    p.subset = IntervalSet({{0.0, 0.5}});
    CHECK(snapshot(s, p).dishes_in_subset == lo);
}

TEST_CASE("L_n(B) / sqrt(n) concentrates near m(B) lambda") {
    auto p = make(1, 0.5, 1);
    p.subset = IntervalSet({{0.0, 0.5}});
    double total = 0.0;
    constexpr int reps = 100;
    for (int i = 0; i < reps; ++i) {
        const auto t = run_trajectory(p, 10000, 21, i, RecordPlan::at({}));
        total += static_cast<double>(t.rows.back().dishes_in_subset) / 100.0;
    }
    CHECK(std::fabs(total / reps - 0.5 * lambda_limit(p)) < 0.1 * 0.5 * lambda_limit(p));
}

TEST_CASE("G is a sub-martingale from frozen states") {
    const auto p = make(2, 0.25, 1, WeightSpec::uniform(1, 2));
    for (int checkpoint : {5, 40, 300}) {
        BuffetState frozen(p, RngStream(9, 0));
        for (int i = 0; i < checkpoint; ++i) step(frozen, p);
        const double g = g_of(frozen, p);
        constexpr int reps = 20000;
        KahanSum sum, sum_sq;
        for (int i = 0; i < reps; ++i) {
            BuffetState s = frozen;
            s.reseed(RngStream(10, i));
            step(s, p);
            const double x = g_of(s, p) - g;
            sum += x;
            sum_sq += x * x;
        }
        const double mean = sum.value() / reps;
        const double sd = std::sqrt(std::max(sum_sq.value() / reps - mean * mean, 0.0));
        CHECK(mean >= -3.0 * sd / std::sqrt(reps));
    }
}

TEST_CASE("RecordPlan: geometric grid plus extras plus n_max") {
    RecordPlan plan;
    plan.growth = 2.0;
    plan.extra = {7, 1000};
    const auto cps = plan.checkpoints(20);
    CHECK(cps == std::vector<std::uint64_t>{1, 2, 4, 7, 8, 16, 20});
    CHECK(RecordPlan::at({5}).checkpoints(9) == std::vector<std::uint64_t>{5, 9});
    const auto p = make(1, 0.5, 1);
    const auto t = run_trajectory(p, 20, 1, 0, plan);
    CHECK(t.rows.size() == cps.size());
    CHECK(t.at(7).n == 7);
    CHECK_THROWS_AS((void)t.at(6), std::out_of_range);
}

TEST_CASE("run_trajectory is deterministic and keeps the final state on request") {
    const auto p = make(2, 0.25, 1, WeightSpec::two_point(1, 2, 0.5));
    RecordPlan plan;
    plan.keep_final_state = true;
    const auto a = run_trajectory(p, 3000, 4, 2, plan);
    const auto b = run_trajectory(p, 3000, 4, 2, plan);
    CHECK(a.rows == b.rows);
    REQUIRE(a.final_state);
    CHECK(a.final_state->n() == 3000);
    CHECK(snapshot(*a.final_state, p) == a.rows.back());
}
