#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wibp/model.hpp"

namespace wibp {

/// Trajectory functionals after n customers.
struct StatRow {
    std::uint64_t n = 0;
    double total_weight = 0.0;  ///< W_n
    double lambda = 0.0;        ///< Λ_n
    std::uint64_t dishes = 0;   ///< L_n
    std::uint64_t last_k = 0;   ///< K_n
    std::uint64_t last_new = 0; ///< N_n
    double kbar = 0.0;          ///< K̄_n
    double z = 0.0;             ///< Z_n = E(K_{n+1} | F_n)
    double g = 0.0;             ///< G_n
    double v = 0.0;             ///< V_n = K̄_n − Z_n
    std::uint64_t dishes_in_subset = 0;  ///< L_n(B), 0 when no subset is configured
    std::uint64_t sum_k = 0;
    std::uint64_t sum_k_sq = 0;
    double sum_r = 0.0;
    double sum_r_sq = 0.0;

    friend bool operator==(const StatRow&, const StatRow&) = default;
};

/// Z_n = Λ_n + (Σ R_i K_i − β L_n) / (Σ R_i + c); Z_0 = α.
double z_of(const BuffetState& state, const ModelParams& params);

/// Same quantity summed dish by dish: Λ_n + Σ_x J_n(x).
double z_from_dishes(const BuffetState& state, const ModelParams& params);

/// G_n = Σ_x J_n(x)², the sum of squared inclusion probabilities.
double g_of(const BuffetState& state, const ModelParams& params);

/// L_n(B): dishes whose label lies in B.
std::uint64_t l_of_B(const BuffetState& state, const IntervalSet& subset);

/// E(K_{n+1}² | F_n) = Z_n + Z_n² − G_n.
double conditional_second_moment(const BuffetState& state, const ModelParams& params);

StatRow snapshot(const BuffetState& state, const ModelParams& params);

/// Checkpoint schedule: ⌈γ^k⌉ for k = 0, 1, ... plus explicit values plus n_max.
struct RecordPlan {
    double growth = 1.2;
    std::vector<std::uint64_t> extra;
    bool geometric = true;
    bool keep_final_state = false;

    std::vector<std::uint64_t> checkpoints(std::uint64_t n_max) const;

    /// Only the given horizons (and n_max).
    static RecordPlan at(std::vector<std::uint64_t> horizons) {
        RecordPlan plan;
        plan.geometric = false;
        plan.extra = std::move(horizons);
        return plan;
    }
};

struct Trajectory {
    ModelParams params;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    std::uint64_t n_max = 0;
    std::vector<StatRow> rows;
    std::optional<BuffetState> final_state;

    /// Row at exactly n; throws std::out_of_range if n was not recorded.
    const StatRow& at(std::uint64_t n) const;
};

Trajectory run_trajectory(const ModelParams& params, std::uint64_t n_max, std::uint64_t seed,
                          std::uint64_t stream_id, const RecordPlan& plan);

}  // namespace wibp
