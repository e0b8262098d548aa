#include "consensus/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace consensus::linalg {

namespace {

void require_square(const Eigen::Index rows, const Eigen::Index cols, const char* who) {
    if (rows != cols) {
        throw DimensionError(std::string(who) + ": matrix must be square");
    }
    if (rows < 1) {
        throw DimensionError(std::string(who) + ": empty matrix");
    }
}

// Pade numerator coefficients for degrees 3..13 and the corresponding
// 1-norm switch points (Higham 2005).
constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e+0;
constexpr double kTheta13 = 5.371920351148152e+0;

template <typename Mat>
void pade3(const Mat& A, const Mat& A2, Mat& U, Mat& V) {
    const double b[] = {120., 60., 12., 1.};
    const Mat I = Mat::Identity(A.rows(), A.cols());
    U.noalias() = A * (b[3] * A2 + b[1] * I);
    V = b[2] * A2 + b[0] * I;
}

template <typename Mat>
void pade5(const Mat& A, const Mat& A2, Mat& U, Mat& V) {
    const double b[] = {30240., 15120., 3360., 420., 30., 1.};
    const Mat I = Mat::Identity(A.rows(), A.cols());
    const Mat A4 = A2 * A2;
    U.noalias() = A * (b[5] * A4 + b[3] * A2 + b[1] * I);
    V = b[4] * A4 + b[2] * A2 + b[0] * I;
}

template <typename Mat>
void pade7(const Mat& A, const Mat& A2, Mat& U, Mat& V) {
    const double b[] = {17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.};
    const Mat I = Mat::Identity(A.rows(), A.cols());
    const Mat A4 = A2 * A2;
    const Mat A6 = A4 * A2;
    U.noalias() = A * (b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
    V = b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
}

template <typename Mat>
void pade9(const Mat& A, const Mat& A2, Mat& U, Mat& V) {
    const double b[] = {17643225600., 8821612800., 2075673600., 302702400., 30270240.,
                        2162160.,     110880.,     3960.,       90.,        1.};
    const Mat I = Mat::Identity(A.rows(), A.cols());
    const Mat A4 = A2 * A2;
    const Mat A6 = A4 * A2;
    const Mat A8 = A6 * A2;
    U.noalias() = A * (b[9] * A8 + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
    V = b[8] * A8 + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
}

template <typename Mat>
void pade13(const Mat& A, const Mat& A2, Mat& U, Mat& V) {
    const double b[] = {64764752532480000., 32382376266240000., 7771770303897600.,
                        1187353796428800.,  129060195264000.,   10559470521600.,
                        670442572800.,      33522128640.,       1323241920.,
                        40840800.,          960960.,            16380.,
                        182.,               1.};
    const Mat I = Mat::Identity(A.rows(), A.cols());
    const Mat A4 = A2 * A2;
    const Mat A6 = A4 * A2;
    Mat tmp = b[13] * A6 + b[11] * A4 + b[9] * A2;
    U.noalias() = A * (A6 * tmp + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
    tmp = b[12] * A6 + b[10] * A4 + b[8] * A2;
    V = A6 * tmp + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
}

template <typename Mat>
Mat expm_impl(const Mat& M) {
    require_square(M.rows(), M.cols(), "expm");
    if (!M.allFinite()) {
        throw NumericError("expm: input has non-finite entries");
    }

    const double norm1 = M.cwiseAbs().colwise().sum().maxCoeff();
    Mat U(M.rows(), M.cols());
    Mat V(M.rows(), M.cols());
    int squarings = 0;

    if (norm1 <= kTheta13) {
        const Mat A2 = M * M;
        if (norm1 <= kTheta3) {
            pade3(M, A2, U, V);
        } else if (norm1 <= kTheta5) {
            pade5(M, A2, U, V);
        } else if (norm1 <= kTheta7) {
            pade7(M, A2, U, V);
        } else if (norm1 <= kTheta9) {
            pade9(M, A2, U, V);
        } else {
            pade13(M, A2, U, V);
        }
    } else {
        squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / kTheta13))));
        if (squarings > 1020) {
            throw NumericError("expm: ||M|| too large, result would overflow", norm1);
        }
        const Mat scaled = M / std::pow(2.0, squarings);
        const Mat A2 = scaled * scaled;
        pade13(scaled, A2, U, V);
    }

    // (V - U) F = (V + U)
    Eigen::PartialPivLU<Mat> lu(V - U);
    Mat F = lu.solve(V + U);
    for (int i = 0; i < squarings; ++i) {
        F = F * F;
    }
    if (!F.allFinite()) {
        throw NumericError("expm: overflow while squaring", norm1);
    }
    return F;
}

template <typename Mat>
Mat kron_impl(const Mat& A, const Mat& B) {
    const Eigen::Index rows = A.rows() * B.rows();
    const Eigen::Index cols = A.cols() * B.cols();
    if (rows * cols > 100'000'000) {
        throw DimensionError("kron: result would exceed the supported size");
    }
    Mat out(rows, cols);
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < A.cols(); ++j) {
            out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
        }
    }
    return out;
}

template <typename Mat>
Mat solve_impl(const Mat& M, const Mat& rhs, SolveInfo* info) {
    require_square(M.rows(), M.cols(), "solve");
    if (M.rows() != rhs.rows()) {
        throw DimensionError("solve: rhs row count does not match");
    }

    Eigen::FullPivLU<Mat> lu(M);
    const auto& lu_mat = lu.matrixLU();
    double max_pivot = 0.0;
    double min_pivot = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < lu_mat.rows(); ++i) {
        const double p = std::abs(lu_mat(i, i));
        max_pivot = std::max(max_pivot, p);
        min_pivot = std::min(min_pivot, p);
    }
    const double cond_estimate =
        min_pivot > 0.0 ? max_pivot / min_pivot : std::numeric_limits<double>::infinity();

    if (!lu.isInvertible()) {
        throw SingularMatrixError("solve: matrix is singular to working tolerance",
                                  cond_estimate);
    }

    Mat X = lu.solve(rhs);
    double residual = (M * X - rhs).norm();
    // One step of iterative refinement when the residual looks improvable.
    if (residual > 1e-14 * (1.0 + rhs.norm())) {
        X += lu.solve(rhs - M * X);
        residual = (M * X - rhs).norm();
    }
    if (info != nullptr) {
        info->residual = residual;
        info->condition = cond_estimate;
    }
    return X;
}

}  // namespace

EigenDecomp eig(const Matrix& M) {
    require_square(M.rows(), M.cols(), "eig");
    if (M.rows() > 500) {
        throw DimensionError("eig: order > 500 not supported");
    }

    Eigen::EigenSolver<Matrix> solver(M, /*computeEigenvectors=*/true);
    if (solver.info() != Eigen::Success) {
        const double residual = M.norm();
        throw NumericError("eig: QR iteration did not converge", residual);
    }

    const Eigen::Index n = M.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    const CVector raw_values = solver.eigenvalues();
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (raw_values[a].real() != raw_values[b].real()) {
            return raw_values[a].real() > raw_values[b].real();
        }
        return raw_values[a].imag() > raw_values[b].imag();
    });

    EigenDecomp out;
    out.values.resize(n);
    out.right_vectors.resize(n, n);
    const CMatrix raw_vectors = solver.eigenvectors();
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values[k] = raw_values[order[static_cast<std::size_t>(k)]];
        out.right_vectors.col(k) = raw_vectors.col(order[static_cast<std::size_t>(k)]);
    }

    out.vector_condition = cond2(out.right_vectors);
    if (std::isfinite(out.vector_condition)) {
        Eigen::FullPivLU<CMatrix> lu(out.right_vectors);
        out.left_vectors = lu.solve(CMatrix::Identity(n, n));
    } else {
        // Defective: fall back to the pseudo-inverse so callers still get
        // finite rows; left * right will not reproduce the identity.
        Eigen::JacobiSVD<CMatrix> svd(out.right_vectors,
                                      Eigen::ComputeThinU | Eigen::ComputeThinV);
        svd.setThreshold(1e-13);
        out.left_vectors = svd.solve(CMatrix::Identity(n, n));
    }
    return out;
}

Matrix expm(const Matrix& M) { return expm_impl<Matrix>(M); }
CMatrix expm(const CMatrix& M) { return expm_impl<CMatrix>(M); }

Matrix expm(const Matrix& M, double t) {
    if (!std::isfinite(t)) {
        throw NumericError("expm: non-finite time");
    }
    return expm_impl<Matrix>(Matrix(M * t));
}

CMatrix expm(const CMatrix& M, double t) {
    if (!std::isfinite(t)) {
        throw NumericError("expm: non-finite time");
    }
    return expm_impl<CMatrix>(CMatrix(M * t));
}

Matrix kron(const Matrix& A, const Matrix& B) { return kron_impl<Matrix>(A, B); }
CMatrix kron(const CMatrix& A, const CMatrix& B) { return kron_impl<CMatrix>(A, B); }

Matrix solve(const Matrix& M, const Matrix& rhs, SolveInfo* info) {
    return solve_impl<Matrix>(M, rhs, info);
}

CMatrix solve(const CMatrix& M, const CMatrix& rhs, SolveInfo* info) {
    return solve_impl<CMatrix>(M, rhs, info);
}

HurwitzResult is_hurwitz(const Matrix& M) {
    require_square(M.rows(), M.cols(), "is_hurwitz");
    Eigen::EigenSolver<Matrix> solver(M, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw NumericError("is_hurwitz: eigenvalue iteration did not converge");
    }
    const CVector values = solver.eigenvalues();
    double abscissa = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        abscissa = std::max(abscissa, values[i].real());
    }
    return {abscissa < 0.0, abscissa};
}

double cond2(const Matrix& M) {
    Eigen::JacobiSVD<Matrix> svd(M);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv[sv.size() - 1] <= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return sv[0] / sv[sv.size() - 1];
}

double cond2(const CMatrix& M) {
    Eigen::JacobiSVD<CMatrix> svd(M);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv[sv.size() - 1] <= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return sv[0] / sv[sv.size() - 1];
}

}  // namespace consensus::linalg
