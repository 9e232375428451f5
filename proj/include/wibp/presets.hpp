#pragma once

#include <string>
#include <vector>

#include "wibp/montecarlo.hpp"

namespace wibp {

struct PresetRun {
    std::string label;  ///< short tag, e.g. "poisson_oracle" or "clt_kbar_predictive"
    SuiteReport report;
    double seconds = 0.0;  ///< wall time of the suite; not part of the report
};

/// The standard verification battery: each theorem-level check at its
/// reference configuration. Only base_seed and parallelism are taken from opts.
std::vector<PresetRun> acceptance_preset(const SuiteOptions& opts);

}  // namespace wibp
