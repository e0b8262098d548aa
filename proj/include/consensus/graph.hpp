#pragma once

/**
 * @file graph.hpp
 * @brief Weighted communication graphs, Laplacians and their spectra.
 */

#include "consensus/types.hpp"

#include <tuple>
#include <vector>

namespace consensus::graph {

/// Weighted digraph over m agents. weights(i, j) > 0 means agent i receives
/// information from agent j. Every nonzero weight must be at least
/// `alpha_floor`; the diagonal is zero. A symmetric weight matrix marks the
/// graph as undirected.
class Digraph {
  public:
    explicit Digraph(Matrix weights, double alpha_floor = 1e-6);

    /// Convenience builder: symmetric graph from (i, j, weight) edges,
    /// 0-based node indices.
    static Digraph undirected(int m, const std::vector<std::tuple<int, int, double>>& edges,
                              double alpha_floor = 1e-6);

    int size() const { return static_cast<int>(weights_.rows()); }
    const Matrix& weights() const { return weights_; }
    double alpha_floor() const { return alpha_floor_; }
    bool is_undirected() const { return undirected_; }

  private:
    Matrix weights_;
    double alpha_floor_;
    bool undirected_;
};

/// Graph Laplacian: L_ii = sum_j alpha_ij, L_ij = -alpha_ij for i != j.
/// Row sums are zero by construction.
struct LaplacianMatrix {
    Matrix L;
    Digraph source;

    int size() const { return static_cast<int>(L.rows()); }
    bool is_undirected() const { return source.is_undirected(); }
};

LaplacianMatrix laplacian_of(const Digraph& g);

/// True iff some base node reaches every other node along the influence
/// arcs (j -> i whenever weights(i, j) > 0).
bool is_connected(const Digraph& g);

/// True iff every ordered pair of nodes is joined by a directed path.
bool is_strongly_connected(const Digraph& g);

/// Spectral data of a Laplacian. Eigenvalues are sorted ascending by real
/// part (ties by imaginary part), so `lambda2` is the algebraic
/// connectivity. `left1` is normalized so that left1' * 1_m = 1; for a
/// connected undirected graph it equals the uniform vector [1/m, ..., 1/m].
struct SpectralSummary {
    CVector values;
    Complex lambda2;
    Vector right1;     // ~ 1_m
    Vector left1;      // xi_1 with xi_1' 1_m = 1
    bool simple_zero;  // zero eigenvalue is simple
};

SpectralSummary spectral_summary(const LaplacianMatrix& lap);

/// Numerical check of the standard Laplacian properties: zero row sums,
/// L * 1 = 0, simple zero eigenvalue for connected graphs, spectrum in the
/// closed right half-plane (real for undirected graphs).
struct LaplacianPropertyReport {
    double row_sum_residual = 0.0;     // max |row sum|
    double ones_kernel_residual = 0.0; // ||L * 1_m||
    double zero_eigenvalue_gap = 0.0;  // |eigenvalue closest to 0|
    bool connected = false;
    bool zero_simple = false;
    double min_real_part = 0.0;
    double max_imag_part = 0.0; // only meaningful for undirected graphs

    bool d1_pass = false;
    bool d2_pass = false;
    bool d3_pass = false;
    bool d4_pass = false;
    bool all_pass() const { return d1_pass && d2_pass && d3_pass && d4_pass; }
};

LaplacianPropertyReport validate_laplacian_properties(const LaplacianMatrix& lap);

}  // namespace consensus::graph
