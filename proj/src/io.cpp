#include "wibp/io.hpp"

#include <cstdio>
#include <sstream>

#include "wibp/format.hpp"

namespace wibp {

using nlohmann::ordered_json;

ordered_json to_json(const ModelParams& params) {
    ordered_json j;
    j["alpha"] = params.alpha;
    j["beta"] = params.beta;
    j["c"] = params.c;
    ordered_json w;
    w["spec"] = params.weights.to_string();
    w["lower_bound"] = params.weights.lower_bound();
    w["upper_bound"] = params.weights.upper_bound();
    w["mean"] = params.weights.mean();
    w["second_moment"] = params.weights.second_moment();
    j["weights"] = w;
    if (params.subset) {
        auto intervals = ordered_json::array();
        for (const auto& [lo, hi] : params.subset->intervals()) intervals.push_back({lo, hi});
        j["subset"] = intervals;
        j["subset_measure"] = params.subset->measure();
    } else {
        j["subset"] = nullptr;
    }
    return j;
}

ordered_json to_json(const StatRow& row) {
    return ordered_json{{"n", row.n},
                        {"W", row.total_weight},
                        {"lambda", row.lambda},
                        {"L", row.dishes},
                        {"K", row.last_k},
                        {"N", row.last_new},
                        {"Kbar", row.kbar},
                        {"Z", row.z},
                        {"G", row.g},
                        {"V", row.v},
                        {"L_B", row.dishes_in_subset},
                        {"sum_K", row.sum_k},
                        {"sum_K_sq", row.sum_k_sq},
                        {"sum_R", row.sum_r},
                        {"sum_R_sq", row.sum_r_sq}};
}

namespace {

template <class T>
ordered_json optional_json(const std::optional<T>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::string cell(const std::optional<double>& v) { return v ? format_g17(*v) : "-"; }

}  // namespace

ordered_json to_json(const EstimateReport& rep) {
    return ordered_json{{"n", rep.n},
                        {"L", rep.dishes},
                        {"Kbar", rep.k_bar},
                        {"beta_hat", optional_json(rep.beta_hat)},
                        {"lambda_hat", optional_json(rep.lambda_hat)},
                        {"sigma_hat_sq", rep.sigma_hat_sq},
                        {"tau_hat_sq", rep.tau_hat_sq},
                        {"ci_level", rep.ci_level},
                        {"ci_lo", rep.ci_lo},
                        {"ci_hi", rep.ci_hi}};
}

ordered_json to_json(const SuiteReport& rep) {
    ordered_json j;
    j["suite"] = rep.suite;
    j["verdict"] = to_string(rep.verdict);
    j["params"] = to_json(rep.params);
    j["n"] = rep.n;
    j["reps"] = rep.reps;
    j["base_seed"] = rep.base_seed;
    j["seed"] = rep.seed;
    j["statistics"] = rep.statistics;
    j["thresholds"] = rep.thresholds;
    j["notes"] = rep.notes;
    return j;
}

ordered_json to_json(const ConfigEcho& echo) {
    ordered_json j = ordered_json::object();
    for (const auto& [k, v] : echo) j[k] = v;
    return j;
}

std::string trajectory_csv(const Trajectory& traj, const ConfigEcho& echo) {
    std::ostringstream out;
    for (const auto& [k, v] : echo) out << "# " << k << '=' << v << '\n';
    out << "# seed=" << traj.seed << '\n' << "# stream_id=" << traj.stream_id << '\n';
    out << "n,W,lambda,L,K,N,Kbar,Z,G,L_B\n";
    for (const auto& r : traj.rows) {
        out << r.n << ',' << format_g17(r.total_weight) << ',' << format_g17(r.lambda) << ','
            << r.dishes << ',' << r.last_k << ',' << r.last_new << ',' << format_g17(r.kbar) << ','
            << format_g17(r.z) << ',' << format_g17(r.g) << ',' << r.dishes_in_subset << '\n';
    }
    return out.str();
}

ordered_json trajectory_json(const Trajectory& traj, const ConfigEcho& echo) {
    ordered_json j;
    j["config"] = to_json(echo);
    j["params"] = to_json(traj.params);
    j["seed"] = traj.seed;
    j["stream_id"] = traj.stream_id;
    j["n_max"] = traj.n_max;
    auto rows = ordered_json::array();
    for (const auto& r : traj.rows) rows.push_back(to_json(r));
    j["checkpoints"] = rows;
    return j;
}

std::string estimate_table(const std::vector<EstimateReport>& reports) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%10s %8s %24s %24s %24s %24s %24s %24s\n", "n", "L",
                  "Kbar", "beta_hat", "sigma_hat_sq", "tau_hat_sq", "ci_lo", "ci_hi");
    out << line;
    for (const auto& r : reports) {
        std::snprintf(line, sizeof line, "%10llu %8llu %24s %24s %24s %24s %24s %24s\n",
                      static_cast<unsigned long long>(r.n),
                      static_cast<unsigned long long>(r.dishes), format_g17(r.k_bar).c_str(),
                      cell(r.beta_hat).c_str(), format_g17(r.sigma_hat_sq).c_str(),
                      format_g17(r.tau_hat_sq).c_str(), format_g17(r.ci_lo).c_str(),
                      format_g17(r.ci_hi).c_str());
        out << line;
    }
    return out.str();
}

std::string suite_summary(const SuiteReport& rep) {
    std::ostringstream out;
    out << '[' << to_string(rep.verdict) << "] " << rep.suite << "  n=" << rep.n
        << " reps=" << rep.reps << " seed=" << rep.seed << '\n';
    for (const auto& [key, value] : rep.statistics.items()) {
        out << "    " << key << " = " << value.dump() << '\n';
    }
    for (const auto& note : rep.notes) out << "    note: " << note << '\n';
    return out.str();
}

}  // namespace wibp
