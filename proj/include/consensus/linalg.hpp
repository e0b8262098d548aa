#pragma once

/**
 * @file linalg.hpp
 * @brief Dense eigendecomposition, matrix exponential, Kronecker products and
 *        linear solves used by the rest of the library.
 *
 * All functions are pure and safe to call concurrently. Matrices are assumed
 * small (order up to a few hundred); everything is dense.
 */

#include "consensus/types.hpp"

#include <vector>

namespace consensus::linalg {

/// Eigendecomposition of a real square matrix.
///
/// Eigenvalues are returned in a deterministic order: descending real part,
/// ties broken by descending imaginary part. `left_vectors` holds the rows of
/// the inverse eigenvector matrix, so `left_vectors * right_vectors == I`
/// whenever `vector_condition` is finite. A large `vector_condition`
/// (>= 1e8) signals a defective or near-defective matrix; no generalized
/// eigenvectors are fabricated in that case.
struct EigenDecomp {
    CVector values;
    CMatrix right_vectors;   // eigenvectors as columns
    CMatrix left_vectors;    // rows, normalized so left * right = I
    double vector_condition; // 2-norm condition of right_vectors

    bool near_defective(double threshold = 1e8) const {
        return !(vector_condition < threshold);
    }
};

EigenDecomp eig(const Matrix& M);

/// e^{M} by scaling-and-squaring with Pade approximants (degree up to 13).
Matrix expm(const Matrix& M);
CMatrix expm(const CMatrix& M);

/// e^{M t}.
Matrix expm(const Matrix& M, double t);
CMatrix expm(const CMatrix& M, double t);

/// Kronecker product, dimensions (rA*rB) x (cA*cB).
Matrix kron(const Matrix& A, const Matrix& B);
CMatrix kron(const CMatrix& A, const CMatrix& B);

/// Diagnostics from a linear solve.
struct SolveInfo {
    double residual = 0.0;  // ||M X - rhs||_F
    double condition = 0.0; // condition estimate from the pivot ratio
};

/// Solve M X = rhs for square M. Throws SingularMatrixError when M is
/// singular to tolerance; otherwise returns X and optionally fills `info`.
Matrix solve(const Matrix& M, const Matrix& rhs, SolveInfo* info = nullptr);
CMatrix solve(const CMatrix& M, const CMatrix& rhs, SolveInfo* info = nullptr);

struct HurwitzResult {
    bool hurwitz = false;
    double abscissa = 0.0; // max real part of the spectrum
};

/// True iff every eigenvalue of M has negative real part.
HurwitzResult is_hurwitz(const Matrix& M);

/// 2-norm condition number (inf when the smallest singular value is zero).
double cond2(const Matrix& M);
double cond2(const CMatrix& M);

}  // namespace consensus::linalg
