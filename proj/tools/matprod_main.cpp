#include "matprod/commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

struct CommonOptions {
    std::string config_path;
    std::string preset;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> steps;
    std::optional<int> trajectories;
    std::optional<int> threads;
    std::string format;
};

void add_common_options(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config_path, "Path to a JSON run configuration");
    cmd->add_option("--preset", opts.preset,
                    "Built-in example family (example-1 .. example-4)");
    cmd->add_option("--seed", opts.seed, "Master seed for the symbol streams");
    cmd->add_option("--steps", opts.steps, "Number of product steps per trajectory");
    cmd->add_option("--trajectories", opts.trajectories, "Number of independent trajectories");
    cmd->add_option("--format", opts.format, "Output format: csv or json-lines");
    cmd->add_option("--out", opts.out_path, "Output path (default: standard output)");
    cmd->add_option("--threads", opts.threads,
                    "Worker threads (default: machine parallelism)");
}

matprod::RunConfig build_config(const CommonOptions& opts) {
    using matprod::ConfigError;

    if (!opts.config_path.empty() && !opts.preset.empty()) {
        throw ConfigError("give either --config or --preset, not both");
    }

    matprod::RunConfig cfg;
    if (!opts.preset.empty()) {
        cfg = matprod::preset_config(opts.preset);
    } else if (!opts.config_path.empty()) {
        std::ifstream in(opts.config_path);
        if (!in) {
            throw ConfigError("cannot open config file '" + opts.config_path + "'");
        }
        std::ostringstream text;
        text << in.rdbuf();
        cfg = matprod::parse_run_config(text.str(), opts.config_path);
    } else {
        throw ConfigError("no ensemble: provide --config PATH or --preset NAME");
    }

    if (opts.seed) {
        cfg.seed = *opts.seed;
    }
    if (opts.steps) {
        cfg.steps = *opts.steps;
    }
    if (opts.trajectories) {
        cfg.trajectories = *opts.trajectories;
    }
    if (opts.threads) {
        cfg.threads = *opts.threads;
    }
    if (!opts.format.empty()) {
        cfg.format = matprod::output_format_from(opts.format);
    }
    if (cfg.steps < 1) {
        throw ConfigError("steps must be >= 1");
    }
    if (cfg.trajectories < 1) {
        throw ConfigError("trajectories must be >= 1");
    }
    return cfg;
}

int dispatch(const CommonOptions& opts, int (*command)(const matprod::RunConfig&, std::ostream&)) {
    const matprod::RunConfig cfg = build_config(opts);
    if (!opts.out_path.empty()) {
        std::ofstream out(opts.out_path);
        if (!out) {
            throw matprod::ConfigError("cannot open output file '" + opts.out_path + "'");
        }
        return command(cfg, out);
    }
    return command(cfg, std::cout);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Random products of 2x2 nonnegative matrices: regime classification, "
                 "overflow-safe simulation, Lyapunov estimation and prediction checks"};
    app.require_subcommand(1);

    CommonOptions classify_opts, simulate_opts, verify_opts;
    CLI::App* classify_cmd =
        app.add_subcommand("classify", "Classify the ensemble and print its predictions");
    add_common_options(classify_cmd, classify_opts);
    CLI::App* simulate_cmd =
        app.add_subcommand("simulate", "Stream per-step observables of the random product");
    add_common_options(simulate_cmd, simulate_opts);
    CLI::App* verify_cmd =
        app.add_subcommand("verify", "Run the pipeline and check predictions against data");
    add_common_options(verify_cmd, verify_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return matprod::kExitConfigError;
    }

    try {
        if (classify_cmd->parsed()) {
            return dispatch(classify_opts, matprod::cmd_classify);
        }
        if (simulate_cmd->parsed()) {
            return dispatch(simulate_opts, matprod::cmd_simulate);
        }
        return dispatch(verify_opts, matprod::cmd_verify);
    } catch (const matprod::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return matprod::kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return matprod::kExitConfigError;
    }
}
