#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cavarray/cli.hpp"
#include "cavarray/errors.hpp"

namespace cli = cavarray::cli;

int main(int argc, char** argv) {
    CLI::App app{"Single-photon scattering in coupled-cavity arrays with three-level nodes"};
    app.set_version_flag("--version", cli::tool_version() + " (" + cli::git_hash() + ")");
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out;
    std::string engine;
    std::optional<int> workers;

    const std::map<std::string, std::string> about = {
        {"spectrum", "R, T, xi and amplitudes along one axis"},
        {"map2d", "one quantity over a two-parameter grid"},
        {"quasibound", "complex momenta of modes trapped between two nodes"},
        {"wavepacket", "Gaussian packet propagation on a finite chain"},
        {"oracle-check", "analytic amplitudes against the lattice solver; exit 1 on mismatch"},
        {"modes", "eigenmodes of a finite chain with localisation measures"},
    };
    for (const auto& name : cli::command_names()) {
        auto* sub = app.add_subcommand(name, about.count(name) ? about.at(name) : "");
        sub->add_option("--config", config_path, "key = value configuration file");
        sub->add_option("--set", overrides, "override one key (key=value), repeatable");
        sub->add_option("--out", out, "output CSV path; metadata goes to <out>.meta.json")
            ->required();
        sub->add_option("--engine", engine, "analytic, oracle or both")
            ->check(CLI::IsMember({"analytic", "oracle", "both"}));
        sub->add_option("--workers", workers, "sweep worker threads")->check(CLI::PositiveNumber);
    }

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    cli::RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = cli::load_config(config_path);
        for (const auto& o : overrides) {
            const auto [key, value] = cli::split_assignment(o);
            cli::apply_setting(cfg, key, value);
        }
        if (!engine.empty()) cli::apply_setting(cfg, "engine", engine);
        if (workers) cli::apply_setting(cfg, "workers", std::to_string(*workers));
    } catch (const cavarray::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return cli::kExitConfig;
    }
    cfg.out = out;
    return cli::run_command(command, cfg, std::cerr);
}
