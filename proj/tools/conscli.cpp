// conscli: synthesis, simulation and verification of diagonal-gain consensus
// compensators for identical linear agents over switching networks.

#include "consensus/config.hpp"
#include "consensus/runner.hpp"
#include "consensus/types.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <iostream>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitDivergence = 4;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string engine;
    std::string strict_jordan;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required) {
    cmd->add_option("--config", args.config_path, "experiment config file")
        ->required(config_required);
    cmd->add_option("--out", args.out_dir, "output directory (overrides the config)");
    cmd->add_option("--seed", args.seed, "schedule seed (overrides the config)")
        ->each([&args](const std::string&) { args.seed_given = true; });
    cmd->add_option("--engine", args.engine, "propagation engine: modal, ode or both")
        ->check(CLI::IsMember({"modal", "ode", "both"}));
    cmd->add_option("--strict-jordan", args.strict_jordan,
                    "require one gain per repeated-eigenvalue group: on or off")
        ->check(CLI::IsMember({"on", "off"}));
}

consensus::config::ExperimentConfig load(const CommonArgs& args) {
    auto cfg = consensus::config::ExperimentConfig::from_file(args.config_path);
    if (args.seed_given) {
        cfg.seed = args.seed;
    }
    if (!args.engine.empty()) {
        cfg.engine = args.engine;
    }
    if (!args.strict_jordan.empty()) {
        cfg.strict_jordan = args.strict_jordan == "on";
    }
    if (!args.out_dir.empty()) {
        cfg.out_dir = args.out_dir;
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"consensus of identical linear agents under switching networks"};
    app.require_subcommand(1);

    CommonArgs synth_args, sim_args, verify_args;
    CLI::App* synth = app.add_subcommand("synth", "modal decomposition and gain synthesis");
    add_common(synth, synth_args, true);
    CLI::App* simulate = app.add_subcommand("simulate", "run the closed loop and write CSVs");
    add_common(simulate, sim_args, true);
    CLI::App* verify = app.add_subcommand("verify", "contraction and stochasticity certificates");
    add_common(verify, verify_args, true);

    std::uint64_t repro_seed = 1;
    std::string repro_out = "out";
    CLI::App* reproduce =
        app.add_subcommand("reproduce-example", "run the bundled four-agent experiment");
    reproduce->add_option("--seed", repro_seed, "schedule seed");
    reproduce->add_option("--out", repro_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            const auto rep = consensus::cli::run_synth(load(synth_args), std::cout);
            return rep.all_pass ? kExitOk : kExitInfeasible;
        }
        if (simulate->parsed()) {
            consensus::cli::run_simulate(load(sim_args), std::cout);
            return kExitOk;
        }
        if (verify->parsed()) {
            consensus::cli::run_verify(load(verify_args), std::cout);
            return kExitOk;
        }
        if (reproduce->parsed()) {
            consensus::cli::run_reproduce(repro_seed, std::cout, repro_out);
            return kExitOk;
        }
    } catch (const consensus::ConfigError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return kExitConfig;
    } catch (const consensus::InfeasibleError& err) {
        std::cerr << "infeasible: " << err.what() << "\n";
        return kExitInfeasible;
    } catch (const consensus::NotApplicableError& err) {
        std::cerr << "infeasible: " << err.what() << "\n";
        return kExitInfeasible;
    } catch (const consensus::DivergenceError& err) {
        std::cerr << "divergence at t = " << err.time() << ": " << err.what() << "\n";
        return kExitDivergence;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return kExitOk;
}
