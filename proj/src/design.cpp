#include "consensus/design.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <string>

namespace consensus::design {

namespace {

constexpr double kUnstableBoundary = -1e-12;  // Re above this counts as unstable
constexpr double kDefectiveCondition = 1e8;

int count_unstable(const CVector& values) {
    int r = 0;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (values[i].real() > kUnstableBoundary) {
            ++r;
        }
    }
    return r;
}

double connectivity_or_throw(const graph::LaplacianMatrix& L, const char* who) {
    const graph::SpectralSummary s = graph::spectral_summary(L);
    const double lam2 = s.lambda2.real();
    if (!(lam2 > 1e-9 * std::max(1.0, L.L.norm()))) {
        throw InfeasibleError(std::string(who) +
                              ": graph is disconnected (algebraic connectivity ~ 0)");
    }
    return lam2;
}

}  // namespace

bool ModalForm::diagonalizable() const {
    return std::all_of(blocks.begin(), blocks.end(),
                       [](const JordanBlockInfo& b) { return b.size == 1; });
}

Matrix ModalForm::real_Q() const {
    const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
    if (Q.imag().cwiseAbs().maxCoeff() > 1e-9 * scale) {
        throw NotApplicableError("ModalForm: Q has complex eigenvector pairs");
    }
    return Q.real();
}

ModalForm modal_decompose(const AgentModel& model) {
    if (model.A.rows() != model.A.cols()) {
        throw DimensionError("modal_decompose: A must be square");
    }
    linalg::EigenDecomp d = linalg::eig(model.A);
    if (d.near_defective(kDefectiveCondition)) {
        throw NotApplicableError(
            "modal_decompose: A is defective to tolerance (eigenvector condition " +
            std::to_string(d.vector_condition) + "); supply a transformation matrix");
    }
    ModalForm mf;
    mf.Q = d.right_vectors;
    mf.Q_inv = d.left_vectors;
    mf.S_diag = d.values;
    mf.unstable_count = count_unstable(d.values);
    mf.blocks.assign(static_cast<std::size_t>(model.n()), JordanBlockInfo{});
    for (int i = 0; i < model.n(); ++i) {
        mf.blocks[static_cast<std::size_t>(i)] = {d.values[i], 1};
    }
    mf.vector_condition = d.vector_condition;
    return mf;
}

ModalForm modal_decompose(const AgentModel& model, const Matrix& user_Q, double tol) {
    const int n = model.n();
    if (user_Q.rows() != n || user_Q.cols() != n) {
        throw DimensionError("modal_decompose: transformation matrix must be n x n");
    }
    const Matrix S = linalg::solve(user_Q, Matrix(model.A * user_Q));
    const double scale = std::max(1.0, model.A.norm());

    // S must be diagonal, or Jordan: unit superdiagonal entries tying
    // together equal eigenvalues, zero elsewhere.
    double structure_residual = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j || j == i + 1) {
                continue;
            }
            structure_residual = std::max(structure_residual, std::abs(S(i, j)));
        }
    }
    for (int i = 0; i + 1 < n; ++i) {
        const double s = S(i, i + 1);
        const double dist = std::min(std::abs(s), std::abs(s - 1.0));
        structure_residual = std::max(structure_residual, dist);
    }
    if (structure_residual > tol * scale) {
        throw NumericError(
            "modal_decompose: transformation does not reduce A to diagonal/Jordan form",
            structure_residual);
    }

    ModalForm mf;
    mf.S_diag.resize(n);
    for (int i = 0; i < n; ++i) {
        mf.S_diag[i] = Complex(S(i, i), 0.0);
    }
    for (int i = 0; i + 1 < n; ++i) {
        if (mf.S_diag[i].real() < mf.S_diag[i + 1].real() - tol * scale) {
            throw InfeasibleError(
                "modal_decompose: eigenvalues must be ordered by descending real part");
        }
    }

    int i = 0;
    while (i < n) {
        int size = 1;
        while (i + size < n && std::abs(S(i + size - 1, i + size) - 1.0) <= tol * scale) {
            if (std::abs(S(i + size, i + size) - S(i, i)) > tol * scale) {
                throw NumericError(
                    "modal_decompose: a Jordan block couples distinct eigenvalues",
                    std::abs(S(i + size, i + size) - S(i, i)));
            }
            ++size;
        }
        mf.blocks.push_back({mf.S_diag[i], size});
        i += size;
    }

    mf.unstable_count = count_unstable(mf.S_diag);
    mf.Q = user_Q.cast<Complex>();
    mf.Q_inv = linalg::solve(mf.Q, CMatrix(CMatrix::Identity(n, n)));
    mf.vector_condition = linalg::cond2(user_Q);
    return mf;
}

std::vector<double> design_gamma_fixed(const ModalForm& mf, const graph::LaplacianMatrix& L,
                                       double margin) {
    if (!(margin > 0.0)) {
        throw std::invalid_argument("design_gamma_fixed: margin must be positive");
    }
    const double lam2 = connectivity_or_throw(L, "design_gamma_fixed");
    std::vector<double> gamma(static_cast<std::size_t>(mf.n()), 1.0);
    for (int i = 0; i < mf.unstable_count; ++i) {
        const double threshold = mf.S_diag[i].real() / lam2;
        gamma[static_cast<std::size_t>(i)] = std::max(threshold, 0.0) * (1.0 + margin) + margin;
    }
    return gamma;
}

std::vector<double> design_gamma_uniform(const ModalForm& mf,
                                         const std::vector<graph::LaplacianMatrix>& family,
                                         double margin) {
    if (family.empty()) {
        throw std::invalid_argument("design_gamma_uniform: empty graph family");
    }
    if (!(margin > 0.0)) {
        throw std::invalid_argument("design_gamma_uniform: margin must be positive");
    }
    double lam2_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < family.size(); ++k) {
        try {
            lam2_min = std::min(lam2_min, connectivity_or_throw(family[k], "design_gamma_uniform"));
        } catch (const InfeasibleError&) {
            throw InfeasibleError("design_gamma_uniform: family member " + std::to_string(k) +
                                  " is disconnected");
        }
    }
    std::vector<double> gamma(static_cast<std::size_t>(mf.n()), 1.0);
    if (mf.unstable_count > 0) {
        const double g =
            std::max(mf.S_diag[0].real(), 0.0) / lam2_min * (1.0 + margin) + margin;
        std::fill(gamma.begin(), gamma.begin() + mf.unstable_count, g);
    }
    return gamma;
}

ConditionReport check_condition_fixed(const std::vector<double>& gamma, const ModalForm& mf,
                                      const graph::LaplacianMatrix& L, bool strict_jordan) {
    const int n = mf.n();
    if (static_cast<int>(gamma.size()) != n) {
        throw DimensionError("check_condition_fixed: gamma size must equal n");
    }
    const graph::SpectralSummary s = graph::spectral_summary(L);
    const double lam2 = s.lambda2.real();

    ConditionReport rep;
    rep.strict_mode = strict_jordan;
    bool modes_pass = true;
    for (int i = 0; i < n; ++i) {
        ModeCheck c;
        c.mode = i;
        c.gamma = gamma[static_cast<std::size_t>(i)];
        const double re = mf.S_diag[i].real();
        c.threshold = lam2 != 0.0 ? re / lam2 : std::numeric_limits<double>::infinity();
        c.slack = c.gamma * lam2 - re;
        c.pass = c.gamma > c.threshold;
        modes_pass = modes_pass && c.pass;
        rep.modes.push_back(c);
    }

    rep.uniform_within_groups = true;
    if (strict_jordan && !mf.diagonalizable()) {
        const double ev_tol = 1e-9 * std::max(1.0, mf.S_diag.cwiseAbs().maxCoeff());
        int group_start = 0;
        for (int i = 1; i <= n; ++i) {
            if (i == n || std::abs(mf.S_diag[i] - mf.S_diag[group_start]) > ev_tol) {
                for (int j = group_start + 1; j < i; ++j) {
                    if (gamma[static_cast<std::size_t>(j)] !=
                        gamma[static_cast<std::size_t>(group_start)]) {
                        rep.uniform_within_groups = false;
                    }
                }
                group_start = i;
            }
        }
    }

    rep.all_pass = modes_pass && (!strict_jordan || rep.uniform_within_groups);
    return rep;
}

SwitchingCheck check_condition_switching(double gamma1, const ModalForm& mf,
                                         const std::vector<graph::LaplacianMatrix>& family) {
    if (family.empty()) {
        throw std::invalid_argument("check_condition_switching: empty graph family");
    }
    SwitchingCheck out;
    out.lambda2_min = std::numeric_limits<double>::infinity();
    for (const auto& L : family) {
        out.lambda2_min = std::min(out.lambda2_min, graph::spectral_summary(L).lambda2.real());
    }
    out.slack = mf.S_diag[0].real() - gamma1 * out.lambda2_min;
    out.pass = out.slack < 0.0;
    return out;
}

Matrix phi_from_gamma(const CMatrix& Q, const std::vector<double>& gamma) {
    const Eigen::Index n = Q.rows();
    if (Q.cols() != n) {
        throw DimensionError("phi_from_gamma: Q must be square");
    }
    if (static_cast<Eigen::Index>(gamma.size()) != n) {
        throw DimensionError("phi_from_gamma: gamma size must equal the order of Q");
    }
    CMatrix scaled = Q;
    for (Eigen::Index j = 0; j < n; ++j) {
        scaled.col(j) *= gamma[static_cast<std::size_t>(j)];
    }
    // Phi = Q diag(gamma) Q^{-1}; solve Phi Q = scaled via the transpose.
    const CMatrix phi_t =
        linalg::solve(CMatrix(Q.transpose()), CMatrix(scaled.transpose()));
    const CMatrix phi = phi_t.transpose();
    const double scale = std::max(1.0, phi.real().cwiseAbs().maxCoeff());
    if (phi.imag().cwiseAbs().maxCoeff() > 1e-8 * scale) {
        throw NumericError(
            "phi_from_gamma: result is not real; conjugate eigenvector pairs need equal gains",
            phi.imag().cwiseAbs().maxCoeff());
    }
    return phi.real();
}

Matrix phi_from_gamma(const Matrix& Q, const std::vector<double>& gamma) {
    return phi_from_gamma(CMatrix(Q.cast<Complex>()), gamma);
}

linalg::HurwitzResult validate_K(const AgentModel& model, const Matrix& K) {
    if (K.rows() != model.B.cols() || K.cols() != model.n()) {
        throw DimensionError("validate_K: K must be n_B x n");
    }
    return linalg::is_hurwitz(Matrix(model.A + model.B * K));
}

linalg::HurwitzResult validate_H(const AgentModel& model, const Matrix& H) {
    if (!model.C) {
        throw DimensionError("validate_H: model has no output matrix C");
    }
    if (H.rows() != model.n() || H.cols() != model.C->rows()) {
        throw DimensionError("validate_H: H must be n x p");
    }
    return linalg::is_hurwitz(Matrix(model.A + H * (*model.C)));
}

Matrix static_gain_controller(const AgentModel& model, const Matrix& Phi) {
    const Matrix& B = model.B;
    if (Phi.rows() != model.n() || Phi.cols() != model.n()) {
        throw DimensionError("static_gain_controller: Phi must be n x n");
    }
    if (B.cols() < B.rows()) {
        throw NotApplicableError("static_gain_controller: B has no full row rank");
    }
    const Matrix gram = B * B.transpose();
    Eigen::FullPivLU<Matrix> lu(gram);
    if (!lu.isInvertible()) {
        throw NotApplicableError("static_gain_controller: B has no full row rank");
    }
    return B.transpose() * lu.solve(Phi);
}

Matrix place_single_input(const Matrix& A, const Vector& b, const std::vector<Complex>& poles) {
    const int n = static_cast<int>(A.rows());
    if (A.cols() != n || b.size() != n || static_cast<int>(poles.size()) != n) {
        throw DimensionError("place_single_input: dimension mismatch");
    }

    Matrix ctrb(n, n);
    Vector col = b;
    for (int j = 0; j < n; ++j) {
        ctrb.col(j) = col;
        col = A * col;
    }
    Eigen::FullPivLU<Matrix> lu(ctrb);
    if (!lu.isInvertible()) {
        throw NotApplicableError("place_single_input: (A, b) is not controllable");
    }

    // Coefficients of prod (s - p_i); must come out real.
    std::vector<Complex> coeff(static_cast<std::size_t>(n) + 1, Complex(0.0, 0.0));
    coeff[0] = Complex(1.0, 0.0);
    for (int k = 0; k < n; ++k) {
        for (int j = k + 1; j >= 1; --j) {
            coeff[static_cast<std::size_t>(j)] =
                coeff[static_cast<std::size_t>(j)] - poles[static_cast<std::size_t>(k)] *
                                                         coeff[static_cast<std::size_t>(j) - 1];
        }
    }
    for (const Complex& c : coeff) {
        if (std::abs(c.imag()) > 1e-9 * (1.0 + std::abs(c.real()))) {
            throw std::invalid_argument(
                "place_single_input: poles must be closed under conjugation");
        }
    }

    Matrix phiA = Matrix::Zero(n, n);
    Matrix power = Matrix::Identity(n, n);
    for (int j = n; j >= 0; --j) {
        phiA += coeff[static_cast<std::size_t>(j)].real() * power;
        if (j > 0) {
            power = power * A;
        }
    }

    const Vector en = Vector::Unit(n, n - 1);
    const Matrix k_row = (lu.solve(phiA)).transpose() * en;  // (C^{-1} phi(A))' e_n
    return -k_row.transpose();
}

}  // namespace consensus::design
