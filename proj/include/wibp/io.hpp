#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "wibp/estimators.hpp"
#include "wibp/model.hpp"
#include "wibp/montecarlo.hpp"
#include "wibp/stats.hpp"

namespace wibp {

/// Resolved configuration as ordered key=value pairs; embedded in every artifact.
using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

nlohmann::ordered_json to_json(const ModelParams& params);
nlohmann::ordered_json to_json(const StatRow& row);
nlohmann::ordered_json to_json(const EstimateReport& rep);
nlohmann::ordered_json to_json(const SuiteReport& rep);
nlohmann::ordered_json to_json(const ConfigEcho& echo);

/// CSV with columns n,W,lambda,L,K,N,Kbar,Z,G,L_B preceded by '#' comment
/// lines carrying the resolved configuration. Reals use 17 significant digits.
std::string trajectory_csv(const Trajectory& traj, const ConfigEcho& echo);

nlohmann::ordered_json trajectory_json(const Trajectory& traj, const ConfigEcho& echo);

/// Aligned text table, one row per estimate.
std::string estimate_table(const std::vector<EstimateReport>& reports);

std::string suite_summary(const SuiteReport& rep);

}  // namespace wibp
