#include "consensus/graph.hpp"

#include "consensus/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace consensus::graph {

namespace {

// Influence reachability: starting from `base`, repeatedly add every node i
// that listens to an already-reached node j (weights(i, j) > 0).
std::vector<bool> influence_reach(const Matrix& w, int base) {
    const int m = static_cast<int>(w.rows());
    std::vector<bool> seen(static_cast<std::size_t>(m), false);
    std::vector<int> stack{base};
    seen[static_cast<std::size_t>(base)] = true;
    while (!stack.empty()) {
        const int j = stack.back();
        stack.pop_back();
        for (int i = 0; i < m; ++i) {
            if (!seen[static_cast<std::size_t>(i)] && w(i, j) > 0.0) {
                seen[static_cast<std::size_t>(i)] = true;
                stack.push_back(i);
            }
        }
    }
    return seen;
}

bool all_true(const std::vector<bool>& v) {
    return std::all_of(v.begin(), v.end(), [](bool b) { return b; });
}

}  // namespace

Digraph::Digraph(Matrix weights, double alpha_floor)
    : weights_(std::move(weights)), alpha_floor_(alpha_floor) {
    if (weights_.rows() != weights_.cols() || weights_.rows() < 1) {
        throw DimensionError("Digraph: weight matrix must be square and nonempty");
    }
    if (!(alpha_floor_ > 0.0)) {
        throw std::invalid_argument("Digraph: alpha_floor must be positive");
    }
    const int m = static_cast<int>(weights_.rows());
    for (int i = 0; i < m; ++i) {
        if (weights_(i, i) != 0.0) {
            throw std::invalid_argument("Digraph: diagonal weights must be zero");
        }
        for (int j = 0; j < m; ++j) {
            const double a = weights_(i, j);
            if (a < 0.0 || !std::isfinite(a)) {
                throw std::invalid_argument("Digraph: weights must be finite and nonnegative");
            }
            if (a > 0.0 && a < alpha_floor_) {
                throw std::invalid_argument(
                    "Digraph: nonzero weight " + std::to_string(a) +
                    " is below the floor " + std::to_string(alpha_floor_));
            }
        }
    }
    undirected_ = weights_.isApprox(weights_.transpose(), 0.0);
}

Digraph Digraph::undirected(int m, const std::vector<std::tuple<int, int, double>>& edges,
                            double alpha_floor) {
    Matrix w = Matrix::Zero(m, m);
    for (const auto& [i, j, a] : edges) {
        w(i, j) = a;
        w(j, i) = a;
    }
    return Digraph(std::move(w), alpha_floor);
}

LaplacianMatrix laplacian_of(const Digraph& g) {
    const int m = g.size();
    const Matrix& w = g.weights();
    Matrix L = -w;
    for (int i = 0; i < m; ++i) {
        L(i, i) = w.row(i).sum();
    }
    return LaplacianMatrix{std::move(L), g};
}

bool is_connected(const Digraph& g) {
    const int m = g.size();
    for (int base = 0; base < m; ++base) {
        if (all_true(influence_reach(g.weights(), base))) {
            return true;
        }
    }
    return false;
}

bool is_strongly_connected(const Digraph& g) {
    const int m = g.size();
    if (m == 1) {
        return true;
    }
    if (!all_true(influence_reach(g.weights(), 0))) {
        return false;
    }
    // Node 0 influences everyone; now everyone must influence node 0,
    // i.e. node 0 reaches everyone along reversed arcs.
    return all_true(influence_reach(g.weights().transpose(), 0));
}

SpectralSummary spectral_summary(const LaplacianMatrix& lap) {
    const int m = lap.size();
    SpectralSummary out;

    if (lap.is_undirected()) {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(lap.L);
        if (solver.info() != Eigen::Success) {
            throw NumericError("spectral_summary: symmetric eigensolver failed");
        }
        out.values = solver.eigenvalues().cast<Complex>(); // ascending
        Vector v1 = solver.eigenvectors().col(0);
        const double mean = v1.mean();
        out.right1 = std::abs(mean) > 1e-12 * v1.norm() ? Vector(v1 / mean) : v1;
        out.left1 = Vector::Constant(m, 1.0 / m);
    } else {
        linalg::EigenDecomp d = linalg::eig(lap.L); // descending real part
        out.values.resize(m);
        for (int i = 0; i < m; ++i) {
            out.values[i] = d.values[m - 1 - i];
        }
        CVector v1 = d.right_vectors.col(m - 1);
        const Complex mean = v1.mean();
        CVector scaled = std::abs(mean) > 1e-12 * v1.norm() ? CVector(v1 / mean) : v1;
        out.right1 = scaled.real();

        // Left kernel of L from the SVD: the left singular vector for the
        // smallest singular value satisfies L' xi = 0.
        Eigen::JacobiSVD<Matrix> svd(lap.L, Eigen::ComputeFullU);
        Vector xi = svd.matrixU().col(m - 1);
        const double total = xi.sum();
        if (std::abs(total) > 1e-12 * xi.norm() * std::sqrt(double(m))) {
            xi /= total;
        }
        out.left1 = xi;
    }

    out.lambda2 = m >= 2 ? out.values[1] : Complex(0.0, 0.0);
    const double scale = std::max(1.0, lap.L.norm());
    int near_zero = 0;
    for (int i = 0; i < m; ++i) {
        if (std::abs(out.values[i]) <= 1e-9 * scale) {
            ++near_zero;
        }
    }
    out.simple_zero = near_zero == 1;
    return out;
}

LaplacianPropertyReport validate_laplacian_properties(const LaplacianMatrix& lap) {
    const int m = lap.size();
    const Matrix& L = lap.L;
    const double scale = std::max(1.0, L.norm());

    LaplacianPropertyReport rep;
    rep.row_sum_residual = L.rowwise().sum().cwiseAbs().maxCoeff();
    rep.ones_kernel_residual = (L * Vector::Ones(m)).norm();

    const SpectralSummary s = spectral_summary(lap);
    rep.zero_eigenvalue_gap = std::abs(s.values[0]);
    for (int i = 1; i < m; ++i) {
        rep.zero_eigenvalue_gap = std::min(rep.zero_eigenvalue_gap, std::abs(s.values[i]));
    }
    rep.connected = is_connected(lap.source);
    rep.zero_simple = s.simple_zero;
    rep.min_real_part = s.values.real().minCoeff();
    rep.max_imag_part = s.values.imag().cwiseAbs().maxCoeff();

    rep.d1_pass = rep.row_sum_residual <= 1e-12 * scale;
    rep.d2_pass = rep.ones_kernel_residual <= 1e-12 * scale &&
                  rep.zero_eigenvalue_gap <= 1e-9 * scale;
    rep.d3_pass = !rep.connected || rep.zero_simple;
    rep.d4_pass = rep.min_real_part >= -1e-9 * scale &&
                  (!lap.is_undirected() || rep.max_imag_part <= 1e-10 * scale);
    return rep;
}

}  // namespace consensus::graph
