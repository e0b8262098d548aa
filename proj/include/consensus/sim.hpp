#pragma once

/**
 * @file sim.hpp
 * @brief Switching schedules and the two propagation engines: closed-form
 *        matrix-exponential products in modal coordinates, and fixed-step
 *        RK4 integration of the full compensator loop.
 */

#include "consensus/design.hpp"
#include "consensus/graph.hpp"
#include "consensus/types.hpp"

#include <cstdint>
#include <vector>

namespace consensus::sim {

/// The family of Laplacians the network switches over, with the quantities
/// the switching analysis needs.
struct GraphFamily {
    std::vector<graph::LaplacianMatrix> members;
    std::vector<graph::SpectralSummary> summaries;
    double lambda2_min = 0.0;  // min over members of Re(lambda2)
    bool all_undirected = false;
    bool all_strongly_connected = false;
    bool all_connected = false;
    int agent_count = 0;

    static GraphFamily from_graphs(const std::vector<graph::Digraph>& graphs);
    static GraphFamily from_laplacians(std::vector<graph::LaplacianMatrix> laplacians);

    int size() const { return static_cast<int>(members.size()); }
};

/// Piecewise-constant switching signal: mode `modes[k]` is active on
/// [switch_times[k], switch_times[k+1]). Every dwell is at least
/// `dwell_floor`; the final interval extends past `horizon`.
struct Schedule {
    std::vector<double> switch_times;  // size intervals() + 1, starts at 0
    std::vector<int> modes;            // 0-based mode index per interval
    double dwell_floor = 0.0;
    double horizon = 0.0;

    int intervals() const { return static_cast<int>(modes.size()); }
    double dwell(int k) const {
        return switch_times[static_cast<std::size_t>(k) + 1] -
               switch_times[static_cast<std::size_t>(k)];
    }
};

/// Seeded schedule with i.i.d. uniform dwell times in [dwell_low, dwell_high]
/// and i.i.d. uniform modes. Identical seeds produce identical schedules on
/// every platform (draws are derived from raw mt19937_64 words).
Schedule generate_schedule(std::uint64_t seed, int num_modes, double dwell_low,
                           double dwell_high, double horizon);

/// Constant-mode schedule with a fixed dwell.
Schedule constant_schedule(int mode, double dwell, double horizon);

/// Explicit schedule; validates monotone switch times and the dwell floor.
Schedule explicit_schedule(std::vector<double> switch_times, std::vector<int> modes,
                           double horizon);

/// States in modal coordinates, sampled at the switch times (plus the
/// horizon). Sample s is an n x m matrix: row i holds mode i across agents.
struct ModalTrajectory {
    std::vector<double> times;
    std::vector<CMatrix> states;
};

/// Closed-form propagation of the block-diagonal modal system: per mode i,
/// x^i(t_{k+1}) = e^{lambda_i h_k} e^{-gamma_i L_k h_k} x^i(t_k). Jordan
/// blocks (which require one gain per block) are propagated with the
/// polynomial-in-t block-triangular product formula.
ModalTrajectory propagate_modal_closed_form(const design::ModalForm& mf,
                                            const std::vector<double>& gamma,
                                            const GraphFamily& family,
                                            const Schedule& schedule, const CMatrix& x0);

/// Simulated closed loop. Each sample holds per-agent rows: w (m x n),
/// eta (m x n), optionally the observer estimate. `error` is the max
/// pairwise infinity-norm deviation between agents.
struct Trajectory {
    std::vector<double> times;
    std::vector<Matrix> w;
    std::vector<Matrix> eta;
    std::vector<Matrix> w_hat;  // empty unless an observer loop was run
    std::vector<double> error;
};

/// Max pairwise ||w_i - w_j||_inf over all agent pairs of one sample.
double consensus_error(const Matrix& agent_states);

/// Error series for a whole trajectory (recomputed from `w`).
std::vector<double> consensus_error(const Trajectory& traj);

/// RK4 integration of the full compensator loop
///   dw_i = A w_i + B K eta_i
///   deta_i = (A + B K) eta_i + Phi sum_j alpha_ij (eta_j - eta_i + w_i - w_j)
/// with the active Laplacian held constant within each dwell interval and
/// switch times landing exactly on the grid. step = 0 picks
/// min(dwell_floor / 50, 1e-2).
Trajectory simulate_compensator_loop(const design::AgentModel& model, const Matrix& K,
                                     const Matrix& Phi, const GraphFamily& family,
                                     const Schedule& schedule, const Matrix& w0,
                                     const Matrix& eta0, double step = 0.0);

/// Observer-based loop: the compensator couples through the estimates
/// w_hat_i, whose error decays with A + H C.
Trajectory simulate_observer_loop(const design::AgentModel& model, const Matrix& K,
                                  const Matrix& H, const Matrix& Phi,
                                  const GraphFamily& family, const Schedule& schedule,
                                  const Matrix& w0, const Matrix& what0, const Matrix& eta0,
                                  double step = 0.0);

/// Predicted common trajectory for a fixed graph with left eigenvector xi1
/// (normalized xi1' 1_m = 1): sum over unstable modes of
/// q_i e^{lambda_i t} xi1' x^i(0), with x^i(0) taken from the agent states
/// z0 (m x n, rows z_j(0)). Requires the unstable modes to be
/// diagonalizable.
CVector asymptotic_consensus_value(const design::ModalForm& mf, const Vector& xi1,
                                   const Matrix& z0, double t);

}  // namespace consensus::sim
