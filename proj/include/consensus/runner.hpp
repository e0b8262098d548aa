#pragma once

/**
 * @file runner.hpp
 * @brief Command implementations behind the CLI: synthesis reports,
 *        simulation runs with CSV/summary output, verification certificates,
 *        and the bundled reference experiment.
 */

#include "consensus/cert.hpp"
#include "consensus/config.hpp"
#include "consensus/design.hpp"
#include "consensus/sim.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace consensus::cli {

/// Everything a command needs, assembled and cross-checked from a config.
struct Workspace {
    design::AgentModel model;
    design::ModalForm modal;
    sim::GraphFamily family;
    sim::Schedule schedule;
    std::vector<double> gamma;
    bool gamma_designed = false;  // true when synthesized, false when given
    Matrix Phi;
    Matrix w0;
    Matrix eta0;
};

Workspace prepare(const config::ExperimentConfig& cfg);

struct SynthReport {
    int n = 0;
    int unstable_count = 0;
    bool defective = false;
    std::vector<double> gamma;
    bool gamma_designed = false;
    Matrix Phi;
    std::vector<double> member_lambda2;
    std::vector<design::ConditionReport> fixed_checks;  // one per family member
    design::SwitchingCheck switching;
    double switching_gamma1 = 0.0;
    bool uniform_unstable_gains = true;
    bool K_hurwitz = false;
    double K_abscissa = 0.0;
    bool H_hurwitz = false;
    double H_abscissa = 0.0;
    bool all_pass = false;
};

SynthReport run_synth(const config::ExperimentConfig& cfg, std::ostream& log,
                      const std::string& out_dir = "");

struct SimulationOutcome {
    double e_initial = 0.0;
    double e_final = 0.0;
    double ratio = 0.0;
    double time_below_1pct = -1.0;  // first t with e(t) < 1% of e(0); -1 if never
    double fitted_rate = 0.0;
    double fitted_prefactor = 0.0;
    int intervals = 0;
    double cross_engine_delta = -1.0;  // "both" engine only
    std::vector<std::string> files;
};

SimulationOutcome run_simulate(const config::ExperimentConfig& cfg, std::ostream& log,
                               const std::string& out_dir = "");

struct VerifyOutcome {
    bool bounds_satisfied = false;
    double max_bound_violation = 0.0;
    double worst_stochastic_residual = 0.0;
    double telescoping_residual = 0.0;
    double oracle_vs_ode_delta = 0.0;
    double oracle_vs_modal_delta = -1.0;  // -1 when the closed form is not applicable
    double fitted_rate = 0.0;
    std::vector<std::string> files;
};

VerifyOutcome run_verify(const config::ExperimentConfig& cfg, std::ostream& log,
                         const std::string& out_dir = "");

/// The bundled four-agent reference experiment (two-state agents with a
/// defective A, four undirected graphs, dwell times in [0.5, 1]).
config::ExperimentConfig reference_config(std::uint64_t seed = 1);

/// One-command reproduction of the reference experiment: trajectory, error
/// and switching-signal CSVs plus a summary with the Phi consistency check.
SimulationOutcome run_reproduce(std::uint64_t seed, std::ostream& log,
                                const std::string& out_dir = "out");

}  // namespace consensus::cli
