// pmerr: batch experiments for cost-function prediction markets.
//
//   pmerr clearing   --config cfg.txt
//   pmerr bias-sweep --config cfg.txt --out bias.csv --threads 4
//   pmerr simulate   --config cfg.txt --seed 7
//   pmerr sigma      --config cfg.txt
//   pmerr decompose  --config cfg.txt
//
// --seed overrides sequence_seed_base; --out overrides the config's output
// path. Without either output the CSV goes to stdout.

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pmerr/config.hpp"
#include "pmerr/errors.hpp"
#include "pmerr/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Error analysis and simulation for cost-function prediction markets"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    app.add_option("--config", config_path, "experiment configuration file")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out_path, "output CSV path (default: config 'output' or stdout)");
    app.add_option("--seed", seed, "base seed of the trade sequences");
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

    using Command = std::function<std::string(const pmerr::ExperimentConfig&, const pmerr::RunContext&)>;
    const std::map<std::string, std::pair<std::string, Command>> commands{
        {"clearing", {"market-clearing prices, N_eff and the sampling bound", pmerr::cmd_clearing}},
        {"bias-sweep", {"market-maker bias against its asymptotic form over the b grid", pmerr::cmd_bias_sweep}},
        {"simulate", {"mean suboptimality gap along simulated trade sequences", pmerr::cmd_simulate}},
        {"sigma", {"empirical strong convexity against the asymptotic bounds", pmerr::cmd_sigma}},
        {"decompose", {"sampling / bias / convergence error decomposition", pmerr::cmd_decompose}},
    };
    for (const auto& [name, entry] : commands) app.add_subcommand(name, entry.first);

    CLI11_PARSE(app, argc, argv);

    try {
        pmerr::ExperimentConfig cfg = pmerr::load_config(config_path);
        if (seed) cfg.sequence_seed_base = *seed;
        const pmerr::RunContext ctx{threads};

        const auto* sub = app.get_subcommands().front();
        const std::string csv = commands.at(sub->get_name()).second(cfg, ctx);

        const std::string target = out_path.empty() ? cfg.output : out_path;
        if (target.empty()) {
            std::cout << csv;
        } else {
            std::ofstream out(target, std::ios::binary);
            if (!out) throw pmerr::ConfigError("cannot write output file '" + target + "'");
            out << csv;
        }
    } catch (const pmerr::Error& e) {
        std::cerr << "pmerr: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
