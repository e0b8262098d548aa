#pragma once

/**
 * @file cert.hpp
 * @brief Numerical certificates for the switching consensus machinery:
 *        doubly-stochastic checks of e^{-gamma L h}, per-interval contraction
 *        factors with telescoped bounds, boundary (non-consensus)
 *        constructions, the Jordan-block reduction check, and the brute-force
 *        Kronecker propagation oracle.
 */

#include "consensus/design.hpp"
#include "consensus/graph.hpp"
#include "consensus/sim.hpp"
#include "consensus/types.hpp"

#include <vector>

namespace consensus::cert {

/// Residuals of the doubly-stochastic structure of W = e^{-gamma L h} for an
/// undirected connected L.
struct StochasticCheck {
    double symmetry_residual = 0.0;
    double row_sum_residual = 0.0;
    double col_sum_residual = 0.0;
    double min_entry = 0.0;          // >= -tol: W is elementwise nonnegative
    double second_modulus = 0.0;     // second-largest eigenvalue modulus
    bool unit_eigenvalue_simple = false;

    bool pass(double tol = 1e-10) const {
        return symmetry_residual <= tol && row_sum_residual <= tol && col_sum_residual <= tol &&
               min_entry >= -tol && unit_eigenvalue_simple;
    }
};

StochasticCheck check_doubly_stochastic(const graph::LaplacianMatrix& L, double gamma, double h);

/// Per-interval contraction data for one switching run of the leading modal
/// block x^1. `factor` is the spectral norm of the interval transition with
/// the consensus projector removed; `eig_bound` is the eigendecomposition
/// upper bound on e^{lambda_A h} ||B||, when available.
struct IntervalFactor {
    int mode = 0;
    double h = 0.0;
    double factor = 0.0;
    double factor_frobenius = 0.0;
    double eig_bound = 0.0;
    bool eig_bound_valid = false;
};

struct ContractionReport {
    std::vector<IntervalFactor> per_interval;
    std::vector<double> times;               // t_{k+1} per interval
    std::vector<double> observed_deviation;  // ||x^1(t_{k+1}) - consensus term||
    std::vector<double> product_bound;       // cumulative prod e^{lambda_A h_k} * factor_k
    std::vector<double> omega_bound;         // e^{-(gamma lambda2_min - lambda_A) t} ||x0||
    double telescoping_residual = 0.0;       // undirected identity check
    double max_factor_error = 0.0;           // | ||D|| - e^{-gamma lambda2 h} |, undirected
    double fitted_rate = 0.0;                // mu from log-linear fit of the deviation
    double fitted_prefactor = 0.0;           // delta_0
    Vector consensus_direction;              // psi / final xi_bar estimate
    std::vector<Vector> xi_bar_history;      // directed runs only
    bool bounds_satisfied = false;
    double max_bound_violation = 0.0;        // max (observed - bound) / ||x0||
};

/// Undirected switching certificate: D(k) = W(k) - (1/m) 1 1', its norms,
/// the telescoped product bound and the family-wide exponential bound.
ContractionReport contraction_undirected(const sim::GraphFamily& family,
                                         const sim::Schedule& schedule, double gamma1,
                                         double lambdaA1, const Vector& x0);

/// Directed switching certificate: B(j) = W(j) - 1_m xi_j' with xi_j' 1 = 1,
/// the running consensus functional xi_bar_k, and per-interval
/// eigendecomposition bounds (flagged off when W(j) is near-defective).
ContractionReport contraction_directed(const sim::GraphFamily& family,
                                       const sim::Schedule& schedule, double gamma1,
                                       double lambdaA1, const Vector& x0);

/// Boundary construction showing the consensus condition is tight: pick the
/// family member with the smallest algebraic connectivity, set
/// gamma1 = lambda_A / lambda2 (scaled by `gamma_scale`), start on the
/// lambda2 eigenvector and hold that graph. At scale 1 the deviation norm
/// stays constant; any scale > 1 makes it decay.
struct BoundaryDemo {
    int critical_member = 0;
    double gamma1 = 0.0;
    double lambda2 = 0.0;
    Vector x0;
    std::vector<double> times;
    std::vector<double> deviation_norms;
    double max_drift = 0.0;  // max |"||delta_k||" - "||delta_0||"|
};

BoundaryDemo boundary_counterexample(const sim::GraphFamily& family, double lambdaA1,
                                     double dwell = 1.0, double horizon = 100.0,
                                     double gamma_scale = 1.0);

/// Jordan-block reduction check: propagate dx_i = (lambda I + N) x_i +
/// gamma sum_j alpha_ij (x_j - x_i) three ways (polynomial-weight closed
/// form, full Kronecker exponential, RK4) and report mismatches plus the
/// consensus spread over time.
struct JordanReductionReport {
    std::vector<double> times;
    std::vector<double> spread;              // max over modes of the agent spread
    double closed_vs_kron = 0.0;             // max relative mismatch
    double closed_vs_ode = 0.0;
    double final_spread = 0.0;
    bool consensus_reached = false;          // final spread below `spread_tol`
};

JordanReductionReport jordan_reduction_check(double lambda, int order, double gamma,
                                    const sim::GraphFamily& family,
                                    const sim::Schedule& schedule, const Matrix& x0,
                                    double ode_step = 0.0, double spread_tol = 1e-6);

/// Brute-force propagation of the stacked system
///   dxhat = (S (x) I_m - Gamma (x) L(t)) xhat
/// by a full matrix exponential per interval. S may be any n x n complex
/// matrix (diagonal, Jordan, ...). The independent oracle for the engines;
/// limited to n * m <= 60.
sim::ModalTrajectory oracle_full_kronecker(const CMatrix& S, const std::vector<double>& gamma,
                                           const sim::GraphFamily& family,
                                           const sim::Schedule& schedule, const CMatrix& x0);

/// Least-squares fit of log(values) ~ log(prefactor) - rate * t.
struct ExponentialFit {
    double rate = 0.0;
    double prefactor = 0.0;
    int points_used = 0;
};

ExponentialFit fit_exponential(const std::vector<double>& times,
                               const std::vector<double>& values);

}  // namespace consensus::cert
