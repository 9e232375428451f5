#include "wibp/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <new>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "wibp/error.hpp"
#include "wibp/format.hpp"
#include "wibp/montecarlo.hpp"
#include "wibp/presets.hpp"

namespace wibp::cli {

namespace {

const std::vector<std::string> kKeys = {"command",  "alpha",        "beta",        "c",
                                        "weights",  "subset",       "n",           "reps",
                                        "seed",     "parallelism",  "proxy_factor", "checkpoints",
                                        "level",    "out",          "suite",       "preset"};

const char* command_name(Command c) {
    switch (c) {
        case Command::simulate: return "simulate";
        case Command::estimate: return "estimate";
        case Command::verify: return "verify";
        case Command::oracle: return "oracle";
    }
    return "simulate";
}

Command parse_command(const std::string& s) {
    if (s == "simulate") return Command::simulate;
    if (s == "estimate") return Command::estimate;
    if (s == "verify") return Command::verify;
    if (s == "oracle") return Command::oracle;
    throw ConfigError("unknown command '" + s + "' (expected simulate, estimate, verify or oracle)");
}

std::string join(const std::vector<std::string>& parts, char sep) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += sep;
        out += p;
    }
    return out;
}

void apply(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "command") {
        cfg.command = parse_command(value);
    } else if (key == "alpha") {
        cfg.params.alpha = parse_double(value, "alpha");
    } else if (key == "beta") {
        cfg.params.beta = parse_double(value, "beta");
    } else if (key == "c") {
        cfg.params.c = parse_double(value, "c");
    } else if (key == "weights") {
        cfg.params.weights = WeightSpec::parse(value);
    } else if (key == "subset") {
        if (trim(value).empty())
            cfg.params.subset.reset();
        else
            cfg.params.subset = IntervalSet::parse(value);
    } else if (key == "n") {
        cfg.n = parse_uint(value, "n");
    } else if (key == "reps") {
        cfg.reps = parse_uint(value, "reps");
    } else if (key == "seed") {
        cfg.seed = parse_uint(value, "seed");
    } else if (key == "parallelism") {
        cfg.parallelism = static_cast<unsigned>(parse_uint(value, "parallelism"));
    } else if (key == "proxy_factor") {
        cfg.proxy_factor = parse_uint(value, "proxy_factor");
    } else if (key == "checkpoints") {
        cfg.checkpoints = std::string(trim(value));
        cfg.plan = parse_checkpoints(cfg.checkpoints);
    } else if (key == "level") {
        cfg.level = parse_double(value, "level");
    } else if (key == "out") {
        cfg.out = std::string(trim(value));
    } else if (key == "suite") {
        for (const auto& s : split(value, ','))
            if (!s.empty()) cfg.suites.push_back(s);
    } else if (key == "preset") {
        cfg.preset = std::string(trim(value));
    } else {
        throw ConfigError("unknown configuration key '" + key + "'");
    }
}

void check_resolved(const RunConfig& cfg) {
    validate_params(cfg.params);
    if (cfg.n < 1) throw ConfigError("n must be >= 1");
    if (cfg.reps < 1) throw ConfigError("reps must be >= 1");
    if (!(cfg.level > 0.0 && cfg.level < 1.0)) throw ConfigError("level must lie in (0, 1)");
    if (!cfg.preset.empty() && cfg.preset != "acceptance")
        throw ConfigError("unknown preset '" + cfg.preset + "' (expected acceptance)");
    for (const auto& s : cfg.suites)
        if (std::find(suite_names().begin(), suite_names().end(), s) == suite_names().end())
            throw ConfigError("unknown suite '" + s + "'");
}

std::vector<std::uint64_t> decade_horizons(std::uint64_t n) {
    std::vector<std::uint64_t> h;
    for (const auto x : {n / 100, n / 10, n})
        if (x >= 2 && (h.empty() || h.back() != x)) h.push_back(x);
    return h;
}

SuiteReport run_suite(const std::string& name, const RunConfig& cfg, const SuiteOptions& opts) {
    const auto& p = cfg.params;
    if (name == "poisson_oracle") return suite_poisson_oracle(p, cfg.n, cfg.reps, opts);
    if (name == "slln") return suite_slln_Ln(p, decade_horizons(cfg.n), cfg.reps, opts);
    if (name == "slln_subset")
        return suite_slln_Ln(p, decade_horizons(cfg.n), cfg.reps, opts, CountTarget::subset);
    if (name == "clt_ln") return suite_clt_Ln(p, cfg.n, cfg.reps, opts);
    if (name == "clt_ln_subset") return suite_clt_Ln(p, cfg.n, cfg.reps, opts, CountTarget::subset);
    if (name == "clt_kbar")
        return suite_clt_Kbar(p, cfg.n, cfg.reps, opts, KbarBranches::automatic(p));
    if (name == "cid_identity") return suite_cid_identity(p, cfg.n, opts);
    if (name == "finite_buffet") return suite_finite_buffet(p, cfg.n, cfg.reps, opts);
    if (name == "beta_hat") return suite_beta_hat(p, decade_horizons(cfg.n), cfg.reps, opts);
    throw ConfigError("unknown suite '" + name + "'");
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open '" + path + "' for writing");
    f << content;
    if (!f) throw ResourceError("failed writing '" + path + "'");
}

// JSON goes to <out>.json with the human-readable text on stdout, or, with
// no --out, JSON on stdout and the text on stderr.
void emit(const RunConfig& cfg, const nlohmann::ordered_json& doc, const std::string& text,
          std::ostream& out, std::ostream& err) {
    const std::string json = doc.dump(2) + "\n";
    if (cfg.out.empty()) {
        out << json;
        err << text;
    } else {
        write_file(cfg.out + ".json", json);
        out << text;
    }
}

int run_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto traj = run_trajectory(cfg.params, cfg.n, cfg.seed, 0, cfg.plan);
    const auto echo = cfg.echo();
    const std::string csv = trajectory_csv(traj, echo);
    if (cfg.out.empty()) {
        out << csv;
    } else {
        write_file(cfg.out + ".csv", csv);
        write_file(cfg.out + ".json", trajectory_json(traj, echo).dump(2) + "\n");
        err << "wrote " << cfg.out << ".csv and " << cfg.out << ".json\n";
    }
    return exit_code::pass;
}

int run_estimate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto traj = run_trajectory(cfg.params, cfg.n, cfg.seed, 0, cfg.plan);
    std::vector<EstimateReport> reports;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : traj.rows) {
        if (row.n < 2) continue;
        reports.push_back(estimate(row, cfg.params, cfg.level));
        rows.push_back(to_json(reports.back()));
    }
    nlohmann::ordered_json doc;
    doc["config"] = to_json(cfg.echo());
    doc["params"] = to_json(cfg.params);
    doc["seed"] = cfg.seed;
    doc["estimates"] = rows;
    doc["final"] = reports.empty() ? nlohmann::ordered_json(nullptr) : rows.back();
    emit(cfg, doc, estimate_table(reports), out, err);
    return exit_code::pass;
}

int run_suites(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    SuiteOptions opts;
    opts.base_seed = cfg.seed;
    opts.parallelism = cfg.parallelism;
    opts.proxy_factor = cfg.proxy_factor;
    opts.ci_level = cfg.level;

    std::vector<SuiteReport> reports;
    std::string text;
    std::optional<std::string> inapplicable;

    if (cfg.command == Command::oracle) {
        try {
            reports.push_back(suite_poisson_oracle(cfg.params, cfg.n, cfg.reps, opts));
        } catch (const InapplicableSuite& e) {
            inapplicable = e.what();
        }
    } else if (cfg.preset == "acceptance") {
        for (auto& run : acceptance_preset(opts)) reports.push_back(std::move(run.report));
    } else if (!cfg.suites.empty()) {
        for (const auto& name : cfg.suites) {
            try {
                reports.push_back(run_suite(name, cfg, opts));
            } catch (const InapplicableSuite& e) {
                inapplicable = e.what();
                break;
            }
        }
    } else {
        // No explicit selection: every suite whose hypotheses the parameters meet.
        for (const auto& name : suite_names()) {
            try {
                reports.push_back(run_suite(name, cfg, opts));
            } catch (const InapplicableSuite& e) {
                text += "skipped " + name + ": " + e.what() + "\n";
            }
        }
    }

    if (inapplicable) {
        err << "inapplicable suite: " << *inapplicable << '\n';
        return exit_code::inapplicable;
    }

    bool all_pass = !reports.empty();
    auto suites = nlohmann::ordered_json::array();
    for (const auto& r : reports) {
        all_pass = all_pass && r.verdict == Verdict::pass;
        suites.push_back(to_json(r));
        text += suite_summary(r);
    }
    nlohmann::ordered_json doc;
    doc["config"] = to_json(cfg.echo());
    doc["overall"] = all_pass ? "pass" : "fail";
    doc["suites"] = suites;
    text += std::string("overall: ") + (all_pass ? "pass" : "fail") + "\n";
    emit(cfg, doc, text, out, err);
    return all_pass ? exit_code::pass : exit_code::suite_failure;
}

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {
        "poisson_oracle", "slln",         "slln_subset",   "clt_ln",  "clt_ln_subset",
        "clt_kbar",       "cid_identity", "finite_buffet", "beta_hat"};
    return names;
}

ConfigEcho RunConfig::echo() const {
    return {{"command", command_name(command)},
            {"alpha", format_shortest(params.alpha)},
            {"beta", format_shortest(params.beta)},
            {"c", format_shortest(params.c)},
            {"weights", params.weights.to_string()},
            {"subset", params.subset ? params.subset->to_string() : ""},
            {"n", std::to_string(n)},
            {"reps", std::to_string(reps)},
            {"seed", std::to_string(seed)},
            {"proxy_factor", std::to_string(proxy_factor)},
            {"checkpoints", checkpoints},
            {"level", format_shortest(level)},
            {"suite", join(suites, ',')},
            {"preset", preset}};
}

RecordPlan parse_checkpoints(const std::string& text) {
    RecordPlan plan;
    plan.geometric = false;
    for (const auto& item : split(text, ',')) {
        if (item.empty()) continue;
        if (item.rfind("geom:", 0) == 0) {
            plan.geometric = true;
            plan.growth = parse_double(item.substr(5), "checkpoints");
            if (!(plan.growth > 1.0)) throw ConfigError("checkpoints: growth factor must exceed 1");
        } else {
            plan.extra.push_back(parse_uint(item, "checkpoints"));
        }
    }
    return plan;
}

std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file '" + path + "'");
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const auto hash = line.find('#');
        const std::string_view body = trim(std::string_view(line).substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key(trim(body.substr(0, eq)));
        std::replace(key.begin(), key.end(), '-', '_');
        if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end())
            throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        entries.emplace_back(key, std::string(trim(body.substr(eq + 1))));
    }
    return entries;
}

RunConfig parse_config(const std::vector<std::string>& args) {
    CLI::App app{"Weighted Indian buffet process simulator and verification suites", "wibp"};
    app.allow_extras(false);

    std::map<std::string, std::string> flags;
    std::vector<CLI::Option*> options;
    std::string command;
    std::string config_path;
    std::vector<std::string> suites;

    app.add_option("command", command, "simulate | estimate | verify | oracle");
    app.add_option("--config", config_path, "key=value configuration file");
    auto flag = [&](const std::string& name, const std::string& key, const std::string& help) {
        options.push_back(app.add_option(name, flags[key], help));
    };
    flag("--alpha", "alpha", "mass parameter, > 0");
    flag("--beta", "beta", "discount parameter, < 1");
    flag("--c", "c", "concentration parameter, > -beta");
    flag("--weights", "weights", "const:r | unif:u,b | twopoint:v1,v2,p");
    flag("--subset", "subset", "comma-separated intervals lo-hi inside [0,1]");
    flag("--n", "n", "number of customers");
    flag("--reps", "reps", "replicates per suite");
    flag("--seed", "seed", "base seed");
    flag("--parallelism", "parallelism", "worker threads (default: $WIBP_PARALLELISM or all cores)");
    flag("--proxy-factor", "proxy_factor", "limit proxy horizon N = factor * n");
    flag("--checkpoints", "checkpoints", "geom:<growth> and/or explicit n values");
    flag("--level", "level", "confidence level");
    flag("--out", "out", "output path prefix");
    flag("--preset", "preset", "verify preset: acceptance");
    app.add_option("--suite", suites, "suite to run (repeatable)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested(app.help());
    } catch (const CLI::ParseError& e) {
        throw ConfigError(e.what());
    }

    RunConfig cfg;
    cfg.plan = parse_checkpoints(cfg.checkpoints);
    bool have_command = false;
    if (!config_path.empty()) {
        for (const auto& [k, v] : read_config_file(config_path)) {
            if (k == "suite") cfg.suites.clear();
            if (k == "command") have_command = true;
            apply(cfg, k, v);
        }
    }
    for (auto* opt : options) {
        if (opt->count() == 0) continue;
        std::string key = opt->get_name().substr(2);
        std::replace(key.begin(), key.end(), '-', '_');
        apply(cfg, key, flags[key]);
    }
    if (!suites.empty()) {
        cfg.suites.clear();
        for (const auto& s : suites) apply(cfg, "suite", s);
    }
    if (!command.empty()) {
        cfg.command = parse_command(command);
        have_command = true;
    }
    if (!have_command) throw ConfigError("missing command (simulate, estimate, verify or oracle)");
    check_resolved(cfg);
    return cfg;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    switch (cfg.command) {
        case Command::simulate: return run_simulate(cfg, out, err);
        case Command::estimate: return run_estimate(cfg, out, err);
        case Command::verify:
        case Command::oracle: return run_suites(cfg, out, err);
    }
    return exit_code::usage;
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = parse_config(args);
    } catch (const HelpRequested& e) {
        out << e.what();
        return exit_code::pass;
    } catch (const InvalidParameters& e) {
        err << "invalid parameters: " << e.what() << '\n';
        return exit_code::usage;
    } catch (const std::invalid_argument& e) {
        err << "invalid configuration: " << e.what() << '\n';
        return exit_code::usage;
    } catch (const ConfigError& e) {
        err << e.what() << '\n';
        return exit_code::usage;
    }
    try {
        return run(cfg, out, err);
    } catch (const InapplicableSuite& e) {
        err << "inapplicable suite: " << e.what() << '\n';
        return exit_code::inapplicable;
    } catch (const ResourceError& e) {
        err << "resource error: " << e.what() << '\n';
        return exit_code::resource;
    } catch (const std::bad_alloc&) {
        err << "resource error: out of memory\n";
        return exit_code::resource;
    } catch (const ConfigError& e) {
        err << e.what() << '\n';
        return exit_code::usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::usage;
    }
}

}  // namespace wibp::cli
