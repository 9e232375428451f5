#include "wibp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "wibp/error.hpp"

namespace wibp {

double z_of(const BuffetState& state, const ModelParams& params) {
    if (state.n() == 0) return state.lambda();
    const double l = static_cast<double>(state.dish_count());
    return state.lambda() +
           (state.weighted_k_sum() - params.beta * l) / (state.total_weight() + params.c);
}

double z_from_dishes(const BuffetState& state, const ModelParams& params) {
    if (state.n() == 0) return state.lambda();
    KahanSum sum;
    const double denom = state.total_weight() + params.c;
    for (const double w : state.weighted_counts()) sum += (w - params.beta) / denom;
    return state.lambda() + sum.value();
}

double g_of(const BuffetState& state, const ModelParams& params) {
    if (state.n() == 0) return 0.0;
    KahanSum sum;
    const double denom = state.total_weight() + params.c;
    for (const double w : state.weighted_counts()) {
        const double j = (w - params.beta) / denom;
        sum += j * j;
    }
    return sum.value();
}

std::uint64_t l_of_B(const BuffetState& state, const IntervalSet& subset) {
    const auto labels = state.labels();
    return static_cast<std::uint64_t>(
        std::count_if(labels.begin(), labels.end(), [&](double x) { return subset.contains(x); }));
}

double conditional_second_moment(const BuffetState& state, const ModelParams& params) {
    const double z = z_of(state, params);
    return z + z * z - g_of(state, params);
}

StatRow snapshot(const BuffetState& state, const ModelParams& params) {
    StatRow row;
    row.n = state.n();
    row.total_weight = state.total_weight();
    row.lambda = state.lambda();
    row.dishes = state.dish_count();
    row.last_k = state.last_k();
    row.last_new = state.last_n_new();
    row.sum_k = state.sum_k();
    row.sum_k_sq = state.sum_k_sq();
    row.sum_r = state.sum_r();
    row.sum_r_sq = state.sum_r_sq();
    row.kbar = row.n == 0 ? 0.0 : static_cast<double>(row.sum_k) / static_cast<double>(row.n);
    row.z = z_of(state, params);
    row.g = g_of(state, params);
    row.v = row.kbar - row.z;
    row.dishes_in_subset = params.subset ? l_of_B(state, *params.subset) : 0;
    return row;
}

std::vector<std::uint64_t> RecordPlan::checkpoints(std::uint64_t n_max) const {
    std::vector<std::uint64_t> out;
    if (geometric) {
        if (!(growth > 1.0)) throw DomainError("checkpoint growth factor must exceed 1");
        for (double x = 1.0; x <= static_cast<double>(n_max); x *= growth)
            out.push_back(static_cast<std::uint64_t>(std::ceil(x - 1e-9)));
    }
    for (const auto n : extra)
        if (n >= 1 && n <= n_max) out.push_back(n);
    out.push_back(n_max);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

const StatRow& Trajectory::at(std::uint64_t n) const {
    const auto it = std::lower_bound(rows.begin(), rows.end(), n,
                                     [](const StatRow& r, std::uint64_t v) { return r.n < v; });
    if (it == rows.end() || it->n != n)
        throw std::out_of_range("trajectory has no checkpoint at n = " + std::to_string(n));
    return *it;
}

Trajectory run_trajectory(const ModelParams& params, std::uint64_t n_max, std::uint64_t seed,
                          std::uint64_t stream_id, const RecordPlan& plan) {
    if (n_max < 1) throw DomainError("run_trajectory requires n_max >= 1");
    const auto checkpoints = plan.checkpoints(n_max);

    Trajectory traj{params, seed, stream_id, n_max, {}, std::nullopt};
    traj.rows.reserve(checkpoints.size());
    BuffetState state(params, RngStream(seed, stream_id));
    CustomerOutcome scratch;
    auto next = checkpoints.begin();
    while (state.n() < n_max) {
        step_into(state, params, scratch);
        if (next != checkpoints.end() && *next == state.n()) {
            traj.rows.push_back(snapshot(state, params));
            ++next;
        }
    }
    if (plan.keep_final_state) traj.final_state = std::move(state);
    return traj;
}

}  // namespace wibp
