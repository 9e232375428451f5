#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "wibp/io.hpp"
#include "wibp/model.hpp"
#include "wibp/stats.hpp"

namespace wibp::cli {

enum class Command { simulate, estimate, verify, oracle };

namespace exit_code {
inline constexpr int pass = 0;
inline constexpr int suite_failure = 1;
inline constexpr int usage = 2;
inline constexpr int inapplicable = 3;
inline constexpr int resource = 4;
}  // namespace exit_code

struct RunConfig {
    Command command = Command::simulate;
    ModelParams params;
    std::uint64_t n = 1000;
    std::uint64_t reps = 200;
    std::uint64_t seed = 1;
    unsigned parallelism = 0;  ///< 0: WIBP_PARALLELISM or hardware threads
    std::uint64_t proxy_factor = 10;
    std::string checkpoints = "geom:1.2";
    RecordPlan plan;
    double level = 0.95;
    std::string out;  ///< output path prefix; empty writes to stdout
    std::vector<std::string> suites;
    std::string preset;

    /// Everything that determines artifact content. Parallelism and the
    /// output path are left out: they never change the bytes produced.
    ConfigEcho echo() const;
};

/// Thrown by parse_config for --help; what() is the usage text.
class HelpRequested : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Known suite names for --suite.
const std::vector<std::string>& suite_names();

/// Parses "geom:1.2,100,500": geometric growth and/or explicit horizons.
RecordPlan parse_checkpoints(const std::string& text);

/// Flat key=value text; '#' starts a comment. Keys use '_' (proxy_factor).
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path);

/// Builds a RunConfig from command-line arguments (without the program
/// name). Values from --config FILE are applied first, flags override them.
/// Throws ConfigError or InvalidParameters; the latter names the violated
/// inequality.
RunConfig parse_config(const std::vector<std::string>& args);

/// Executes a validated configuration and returns the process exit code.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_config + run with error-to-exit-code mapping.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wibp::cli
