#pragma once

/**
 * @file design.hpp
 * @brief Modal decomposition of the agent model and synthesis/validation of
 *        the compensator gains (diagonal Gamma, Phi = Q Gamma Q^{-1}, K, H).
 */

#include "consensus/graph.hpp"
#include "consensus/linalg.hpp"
#include "consensus/types.hpp"

#include <optional>
#include <vector>

namespace consensus::design {

/// Open-loop agent: dw/dt = A w + B u, optional output y = C w.
struct AgentModel {
    Matrix A;
    Matrix B;
    std::optional<Matrix> C;

    int n() const { return static_cast<int>(A.rows()); }
    int n_inputs() const { return static_cast<int>(B.cols()); }
    int n_outputs() const { return C ? static_cast<int>(C->rows()) : 0; }
};

struct JordanBlockInfo {
    Complex eigenvalue;
    int size = 1;
};

/// Modal form of A: Q^{-1} A Q is diagonal, or block-Jordan when A is
/// defective and a user transformation was supplied. Eigenvalues are sorted
/// by descending real part; the first `unstable_count` lie in the closed
/// right half-plane. Q is kept complex so conjugate eigenvector pairs stay
/// exact; `real_Q()` recovers the real matrix when the spectrum is real.
struct ModalForm {
    CMatrix Q;
    CMatrix Q_inv;
    CVector S_diag;
    int unstable_count = 0;                // r
    std::vector<JordanBlockInfo> blocks;   // sizes sum to n; all 1 <=> diagonalizable
    double vector_condition = 0.0;

    int n() const { return static_cast<int>(S_diag.size()); }
    bool diagonalizable() const;
    Matrix real_Q() const;  // throws NotApplicableError if Q is genuinely complex
};

/// Decompose via the eigenvectors of A. Throws NotApplicableError when A is
/// defective to tolerance (vector condition >= 1e8); supply a transformation
/// matrix in that case.
ModalForm modal_decompose(const AgentModel& model);

/// Decompose with a user transformation. Q^{-1} A Q must come out diagonal
/// or block-Jordan (lambda I + N) within `tol`, with eigenvalues ordered by
/// descending real part.
ModalForm modal_decompose(const AgentModel& model, const Matrix& user_Q, double tol = 1e-8);

/// Per-mode gains for a fixed connected graph:
/// gamma_i = max(Re(lambda_A^i)/Re(lambda2), 0) * (1 + margin) + margin for
/// unstable modes, 1 for the stable tail.
std::vector<double> design_gamma_fixed(const ModalForm& mf, const graph::LaplacianMatrix& L,
                                       double margin = 0.25);

/// One shared gain for all unstable modes over a switching family, sized
/// against the smallest algebraic connectivity in the family; stable tail 1.
std::vector<double> design_gamma_uniform(const ModalForm& mf,
                                         const std::vector<graph::LaplacianMatrix>& family,
                                         double margin = 0.25);

struct ModeCheck {
    int mode = 0;
    double gamma = 0.0;
    double threshold = 0.0;  // Re(lambda_A) / Re(lambda2)
    double slack = 0.0;      // gamma * Re(lambda2) - Re(lambda_A)
    bool pass = false;
};

struct ConditionReport {
    std::vector<ModeCheck> modes;
    bool uniform_within_groups = true;  // strict-mode requirement on Jordan structures
    bool strict_mode = true;
    bool all_pass = false;
};

/// Consensus condition for a fixed graph, mode by mode (strict inequality;
/// equality fails). In strict mode a defective structure additionally
/// requires one gain per repeated-eigenvalue group.
ConditionReport check_condition_fixed(const std::vector<double>& gamma, const ModalForm& mf,
                                      const graph::LaplacianMatrix& L,
                                      bool strict_jordan = true);

struct SwitchingCheck {
    bool pass = false;
    double slack = 0.0;        // Re(lambda_A^1) - gamma1 * lambda2_min (< 0 passes)
    double lambda2_min = 0.0;  // min over the family of Re(lambda2)
};

/// Switching-family condition: Re(lambda_A^1) - gamma1 * lambda2_min < 0.
SwitchingCheck check_condition_switching(double gamma1, const ModalForm& mf,
                                         const std::vector<graph::LaplacianMatrix>& family);

/// Phi = Q diag(gamma) Q^{-1}. The result must be real: conjugate
/// eigenvector pairs need equal gains.
Matrix phi_from_gamma(const CMatrix& Q, const std::vector<double>& gamma);
Matrix phi_from_gamma(const Matrix& Q, const std::vector<double>& gamma);

/// Hurwitz validation of A + B K and A + H C.
linalg::HurwitzResult validate_K(const AgentModel& model, const Matrix& K);
linalg::HurwitzResult validate_H(const AgentModel& model, const Matrix& H);

/// Static control law coefficients B'(B B')^{-1} Phi for a B with full row
/// rank; throws NotApplicableError otherwise.
Matrix static_gain_controller(const AgentModel& model, const Matrix& Phi);

/// Ackermann pole placement for single-input pairs: returns K (1 x n) such
/// that A + b K has the requested spectrum.
Matrix place_single_input(const Matrix& A, const Vector& b, const std::vector<Complex>& poles);

}  // namespace consensus::design
