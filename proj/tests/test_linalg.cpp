#include "consensus/linalg.hpp"

#include "doctest.h"
#include "test_support.hpp"

#include <cmath>
#include <random>

using namespace consensus;
using testsup::max_abs_diff;

TEST_CASE("eig: diagonal matrix, descending order") {
    Matrix M(2, 2);
    M << 2.0, 0.0, 0.0, 3.0;
    const auto d = linalg::eig(M);
    CHECK(d.values[0].real() == doctest::Approx(3.0));
    CHECK(d.values[1].real() == doctest::Approx(2.0));
    CHECK(d.vector_condition == doctest::Approx(1.0).epsilon(1e-9));
    // unit-axis eigenvectors
    CHECK(std::abs(d.right_vectors(0, 0)) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::abs(d.right_vectors(1, 1)) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("eig: defective matrix is flagged, not repaired") {
    const Matrix A = testsup::refsys::A();
    const auto d = linalg::eig(A);
    CHECK(d.values[0].real() == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(d.values[1].real() == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(d.values[0].imag() == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(d.near_defective());
}

TEST_CASE("eig: rotation generator has spectrum {i, -i}") {
    Matrix M(2, 2);
    M << 0.0, 1.0, -1.0, 0.0;
    const auto d = linalg::eig(M);
    CHECK(d.values[0].real() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(d.values[0].imag() == doctest::Approx(1.0));
    CHECK(d.values[1].imag() == doctest::Approx(-1.0));
}

TEST_CASE("eig: reconstruction V diag(v) V^-1 recovers the matrix") {
    std::mt19937_64 rng(7001);
    for (int rep = 0; rep < 20; ++rep) {
        const int n = testsup::irand(rng, 2, 8);
        const Matrix M = testsup::random_matrix(rng, n, n);
        const auto d = linalg::eig(M);
        if (d.vector_condition >= 1e6) {
            continue;
        }
        const CMatrix rebuilt =
            d.right_vectors * d.values.asDiagonal() * d.left_vectors;
        CHECK(max_abs_diff(rebuilt, CMatrix(M.cast<Complex>())) < 1e-9 * d.vector_condition);
        CHECK(max_abs_diff(CMatrix(d.left_vectors * d.right_vectors),
                           CMatrix(CMatrix::Identity(n, n))) < 1e-9 * d.vector_condition);
    }
}

TEST_CASE("expm: zero matrix gives the identity") {
    const Matrix Z = Matrix::Zero(5, 5);
    CHECK(max_abs_diff(linalg::expm(Z, 3.7), Matrix::Identity(5, 5)) == 0.0);
}

TEST_CASE("expm: two-node Laplacian closed form") {
    // L = [[a,-a],[-a,a]]; e^{-gamma L h} has the hand closed form with
    // q = e^{-2 gamma a h}.
    const double gamma = 1.0, a = 1.0, h = 1.0;
    Matrix L(2, 2);
    L << a, -a, -a, a;
    const Matrix W = linalg::expm(Matrix(-gamma * L), h);
    const double q = std::exp(-2.0 * gamma * a * h);
    Matrix expected(2, 2);
    expected << 0.5 * (1 + q), 0.5 * (1 - q), 0.5 * (1 - q), 0.5 * (1 + q);
    CHECK(max_abs_diff(W, expected) < 1e-14);
}

TEST_CASE("expm: diagonal matrix exponentiates entrywise") {
    Matrix D(3, 3);
    D.setZero();
    D(0, 0) = -0.3;
    D(1, 1) = 1.2;
    D(2, 2) = 4.0;
    const Matrix E = linalg::expm(D, 0.5);
    for (int i = 0; i < 3; ++i) {
        CHECK(E(i, i) == doctest::Approx(std::exp(D(i, i) * 0.5)).epsilon(1e-13));
    }
    CHECK(std::abs(E(0, 1)) + std::abs(E(1, 2)) + std::abs(E(2, 0)) < 1e-15);
}

TEST_CASE("expm: semigroup property e^{M(s+t)} = e^{Ms} e^{Mt}") {
    std::mt19937_64 rng(7002);
    for (int rep = 0; rep < 10; ++rep) {
        const int n = testsup::irand(rng, 2, 10);
        const Matrix M = testsup::random_matrix(rng, n, n);
        const double s = testsup::urand(rng, 0.1, 2.0);
        const double t = testsup::urand(rng, 0.1, 2.0);
        const Matrix lhs = linalg::expm(M, s + t);
        const Matrix rhs = linalg::expm(M, s) * linalg::expm(M, t);
        CHECK(max_abs_diff(lhs, rhs) < 1e-9 * std::max(1.0, lhs.norm()));
    }
}

TEST_CASE("expm: splits over commuting terms (A = lambda I)") {
    std::mt19937_64 rng(7003);
    for (int rep = 0; rep < 10; ++rep) {
        const int n = testsup::irand(rng, 2, 6);
        const double lambda = testsup::urand(rng, -1.0, 1.0);
        const Matrix A = lambda * Matrix::Identity(n, n);
        const Matrix B = testsup::random_matrix(rng, n, n);
        const Matrix lhs = linalg::expm(Matrix(A + B), 1.0);
        const Matrix rhs = linalg::expm(A, 1.0) * linalg::expm(B, 1.0);
        CHECK(max_abs_diff(lhs, rhs) < 1e-9 * std::max(1.0, lhs.norm()));
    }
}

TEST_CASE("kron: identity times identity") {
    const Matrix K = linalg::kron(Matrix(Matrix::Identity(2, 2)), Matrix(Matrix::Identity(3, 3)));
    CHECK(max_abs_diff(K, Matrix::Identity(6, 6)) == 0.0);
}

TEST_CASE("kron: mixed-product identities") {
    std::mt19937_64 rng(7004);
    for (int rep = 0; rep < 10; ++rep) {
        const Matrix A = testsup::random_matrix(rng, 2, 2);
        const Matrix B = testsup::random_matrix(rng, 3, 3);
        // A (x) B = (A (x) I)(I (x) B)
        const Matrix lhs = linalg::kron(A, B);
        const Matrix rhs =
            linalg::kron(A, Matrix(Matrix::Identity(3, 3))) * linalg::kron(Matrix(Matrix::Identity(2, 2)), B);
        CHECK(max_abs_diff(lhs, rhs) < 1e-12);

        // AB (x) CD = (A (x) C)(B (x) D)
        const Matrix C = testsup::random_matrix(rng, 2, 2);
        const Matrix D = testsup::random_matrix(rng, 3, 3);
        const Matrix lhs2 = linalg::kron(Matrix(A * C), Matrix(B * D));
        const Matrix rhs2 = linalg::kron(A, B) * linalg::kron(C, D);
        CHECK(max_abs_diff(lhs2, rhs2) < 1e-12);
    }
}

TEST_CASE("kron: exponential identities for A (x) I and I (x) A") {
    std::mt19937_64 rng(7005);
    const int n = 3, m = 4;
    const Matrix A = testsup::random_matrix(rng, n, n);
    const double t = 0.7;
    const Matrix lhs = linalg::expm(linalg::kron(A, Matrix(Matrix::Identity(m, m))), t);
    const Matrix rhs = linalg::kron(linalg::expm(A, t), Matrix(Matrix::Identity(m, m)));
    CHECK(max_abs_diff(lhs, rhs) < 1e-9);

    const Matrix lhs2 = linalg::expm(linalg::kron(Matrix(Matrix::Identity(m, m)), A), t);
    const Matrix rhs2 = linalg::kron(Matrix(Matrix::Identity(m, m)), linalg::expm(A, t));
    CHECK(max_abs_diff(lhs2, rhs2) < 1e-9);
}

TEST_CASE("solve: identity returns the right-hand side") {
    std::mt19937_64 rng(7006);
    const Matrix rhs = testsup::random_matrix(rng, 4, 2);
    CHECK(max_abs_diff(linalg::solve(Matrix::Identity(4, 4), rhs), rhs) == 0.0);
}

TEST_CASE("solve: hand-checked 2x2 inverse") {
    const Matrix Q = testsup::refsys::Q();
    const Matrix Qinv = linalg::solve(Q, Matrix::Identity(2, 2));
    Matrix expected(2, 2);
    expected << -25.0, 25.0, 8.0, -10.0;
    CHECK(max_abs_diff(Qinv, expected) < 1e-10);
}

TEST_CASE("solve: Hilbert 8x8 succeeds and reports a large condition") {
    Matrix H(8, 8);
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
            H(i, j) = 1.0 / (i + j + 1);
        }
    }
    linalg::SolveInfo info;
    const Matrix X = linalg::solve(H, Matrix::Identity(8, 8), &info);
    CHECK(info.condition > 1e6);
    CHECK((H * X - Matrix::Identity(8, 8)).norm() < 1e-5);
}

TEST_CASE("solve: singular matrix throws with a condition estimate") {
    Matrix S(2, 2);
    S << 1.0, 2.0, 2.0, 4.0;
    CHECK_THROWS_AS(linalg::solve(S, Matrix::Identity(2, 2)), SingularMatrixError);
}

TEST_CASE("solve: residual is tiny for well-conditioned systems") {
    std::mt19937_64 rng(7007);
    for (int rep = 0; rep < 10; ++rep) {
        const int n = testsup::irand(rng, 2, 12);
        const Matrix M =
            testsup::random_matrix(rng, n, n) + 3.0 * Matrix::Identity(n, n);
        const Matrix rhs = testsup::random_matrix(rng, n, 3);
        linalg::SolveInfo info;
        linalg::solve(M, rhs, &info);
        CHECK(info.residual <= 1e-10 * rhs.norm());
    }
}

TEST_CASE("is_hurwitz: -I, the reference closed loop, and the open loop") {
    const auto neg = linalg::is_hurwitz(Matrix(-Matrix::Identity(3, 3)));
    CHECK(neg.hurwitz);
    CHECK(neg.abscissa == doctest::Approx(-1.0));

    const Matrix A = testsup::refsys::A();
    const Matrix B = testsup::refsys::B();
    const Matrix K = testsup::refsys::K();
    const auto closed = linalg::is_hurwitz(Matrix(A + B * K));
    CHECK(closed.hurwitz);
    CHECK(closed.abscissa == doctest::Approx(-1.5).epsilon(1e-3));

    const auto open = linalg::is_hurwitz(A);
    CHECK_FALSE(open.hurwitz);
    CHECK(open.abscissa == doctest::Approx(0.1).epsilon(1e-6));
}
