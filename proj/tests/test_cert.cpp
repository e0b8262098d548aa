#include "consensus/cert.hpp"

#include "consensus/linalg.hpp"
#include "doctest.h"
#include "test_support.hpp"

#include <cmath>
#include <random>

using namespace consensus;
using graph::Digraph;

namespace {

sim::GraphFamily reference_family() {
    return sim::GraphFamily::from_graphs(testsup::refsys::graphs());
}

}  // namespace

TEST_CASE("doubly stochastic: two-node closed form sums to one exactly") {
    const auto lap = graph::laplacian_of(Digraph::undirected(2, {{0, 1, 0.6}}));
    const auto check = cert::check_doubly_stochastic(lap, 1.5, 0.8);
    CHECK(check.row_sum_residual < 1e-14);
    CHECK(check.col_sum_residual < 1e-14);
    CHECK(check.symmetry_residual < 1e-14);
    CHECK(check.pass());
}

TEST_CASE("doubly stochastic: reference graph G1 at gamma = 2.5, h = 0.7") {
    const auto lap = graph::laplacian_of(testsup::refsys::graphs()[0]);
    const auto check = cert::check_doubly_stochastic(lap, 2.5, 0.7);
    CHECK(check.pass(1e-10));
    CHECK(check.min_entry >= -1e-12);
    CHECK(check.second_modulus ==
          doctest::Approx(std::exp(-2.5 * testsup::refsys::kLambda2G1 * 0.7)).epsilon(1e-9));
}

TEST_CASE("doubly stochastic: small gamma h approaches the identity") {
    const auto lap = graph::laplacian_of(Digraph::undirected(3, {{0, 1, 1.0}, {1, 2, 1.0}}));
    const auto check = cert::check_doubly_stochastic(lap, 1e-4, 1.0);
    CHECK(check.pass(1e-10));
    const Matrix W = linalg::expm(Matrix(-1e-4 * lap.L), 1.0);
    CHECK(testsup::max_abs_diff(W, Matrix::Identity(3, 3)) < 1e-3);
}

TEST_CASE("contraction undirected: single-interval two-node factor") {
    const double alpha = 0.9, gamma = 1.3, h = 0.7;
    const auto fam =
        sim::GraphFamily::from_graphs({Digraph::undirected(2, {{0, 1, alpha}})});
    Vector x0(2);
    x0 << 1.0, -1.0;
    const auto rep = cert::contraction_undirected(
        fam, sim::explicit_schedule({0.0, h}, {0}, h), gamma, 0.0, x0);
    REQUIRE(rep.per_interval.size() == 1);
    CHECK(rep.per_interval[0].factor ==
          doctest::Approx(std::exp(-2.0 * gamma * alpha * h)).epsilon(1e-12));
    CHECK(rep.max_factor_error < 1e-12);
    CHECK(rep.bounds_satisfied);
}

TEST_CASE("contraction undirected: repeated graph telescopes the same factor") {
    const double gamma = 2.0, lambdaA = 0.1;
    const auto fam = sim::GraphFamily::from_graphs(
        {Digraph::undirected(3, {{0, 1, 0.8}, {1, 2, 0.5}})});
    Vector x0(3);
    x0 << 2.0, 0.0, -1.0;
    const int K = 6;
    const double h = 1.0;
    const auto rep = cert::contraction_undirected(
        fam, sim::constant_schedule(0, h, K * h), gamma, lambdaA, x0);
    REQUIRE(rep.per_interval.size() == K);
    const double lam2 = fam.summaries[0].lambda2.real();
    const double per = std::exp((lambdaA - gamma * lam2) * h);
    double expected = 1.0;
    for (int k = 0; k < K; ++k) {
        expected *= per;
        CHECK(rep.product_bound[static_cast<std::size_t>(k)] ==
              doctest::Approx(expected * x0.norm()).epsilon(1e-9));
    }
    CHECK(rep.telescoping_residual < 1e-10);
    CHECK(rep.bounds_satisfied);
}

TEST_CASE("contraction undirected: reference run satisfies every bound") {
    const auto fam = reference_family();
    Vector x0(4);
    x0 << 1.0, -2.0, 0.5, 3.0;
    const auto schedule = sim::generate_schedule(31, 4, 0.5, 1.0, 20.0);
    const auto rep = cert::contraction_undirected(fam, schedule, 2.5, 0.1, x0);
    CHECK(rep.bounds_satisfied);
    CHECK(rep.max_bound_violation == 0.0);
    CHECK(rep.telescoping_residual < 1e-10);
    for (std::size_t k = 0; k < rep.observed_deviation.size(); ++k) {
        CHECK(rep.observed_deviation[k] <= rep.omega_bound[k] * (1.0 + 1e-9));
    }
}

TEST_CASE("contraction undirected: fitted rate at least matches the bound") {
    std::mt19937_64 rng(12001);
    for (int rep_i = 0; rep_i < 10; ++rep_i) {
        const int m = testsup::irand(rng, 2, 5);
        const int v = testsup::irand(rng, 1, 3);
        std::vector<Digraph> gs;
        for (int k = 0; k < v; ++k) {
            gs.push_back(testsup::random_connected_undirected(rng, m));
        }
        const auto fam = sim::GraphFamily::from_graphs(gs);
        const double lambdaA = testsup::urand(rng, 0.0, 0.3);
        const double gamma = lambdaA / fam.lambda2_min * 1.5 + 0.5;
        const double rate = gamma * fam.lambda2_min - lambdaA;
        const double horizon = std::min(15.0, 20.0 / rate);
        const auto schedule = sim::generate_schedule(rng(), v, 0.5, 1.0, horizon);
        Vector x0 = testsup::random_matrix(rng, m, 1).col(0);
        const auto report = cert::contraction_undirected(fam, schedule, gamma, lambdaA, x0);
        CHECK(report.bounds_satisfied);
        CHECK(report.fitted_rate >= 0.9 * rate);
    }
}

TEST_CASE("contraction directed: undirected input reduces to the symmetric certificate") {
    const auto fam = reference_family();
    Vector x0(4);
    x0 << 1.0, -2.0, 0.5, 3.0;
    const auto schedule = sim::generate_schedule(57, 4, 0.5, 1.0, 10.0);
    const auto dir = cert::contraction_directed(fam, schedule, 2.5, 0.1, x0);
    const auto und = cert::contraction_undirected(fam, schedule, 2.5, 0.1, x0);
    REQUIRE(dir.per_interval.size() == und.per_interval.size());
    for (std::size_t k = 0; k < dir.per_interval.size(); ++k) {
        CHECK(dir.per_interval[k].factor ==
              doctest::Approx(und.per_interval[k].factor).epsilon(1e-9));
        CHECK(dir.observed_deviation[k] ==
              doctest::Approx(und.observed_deviation[k]).epsilon(1e-6));
    }
    CHECK(dir.bounds_satisfied);
}

TEST_CASE("contraction directed: W fixes 1 and xi from the left") {
    std::mt19937_64 rng(12002);
    for (int rep = 0; rep < 5; ++rep) {
        const int m = testsup::irand(rng, 3, 6);
        const auto g = testsup::random_strongly_connected(rng, m);
        const auto lap = graph::laplacian_of(g);
        const double gamma = testsup::urand(rng, 0.5, 2.0);
        const double h = testsup::urand(rng, 0.5, 1.0);
        const Matrix W = linalg::expm(Matrix(-gamma * lap.L), h);
        CHECK((W * Vector::Ones(m) - Vector::Ones(m)).norm() < 1e-12);
        const Vector xi = graph::spectral_summary(lap).left1;
        CHECK((xi.transpose() * W - xi.transpose()).norm() < 1e-9);
    }
}

TEST_CASE("contraction directed: three-cycle factors shrink as gamma doubles") {
    Matrix w = Matrix::Zero(3, 3);
    w(1, 0) = 0.8;
    w(2, 1) = 1.1;
    w(0, 2) = 0.6;
    const auto fam = sim::GraphFamily::from_graphs({Digraph(w)});
    Vector x0(3);
    x0 << 1.0, 0.0, -1.0;
    const auto schedule = sim::constant_schedule(0, 1.0, 4.0);
    double prev = std::numeric_limits<double>::infinity();
    for (const double gamma : {1.0, 2.0, 4.0, 8.0}) {
        const auto rep = cert::contraction_directed(fam, schedule, gamma, 0.0, x0);
        const double factor = rep.per_interval[0].factor;
        CHECK(factor < prev);
        prev = factor;
    }
}

TEST_CASE("contraction directed: seeded two-mode family satisfies the product bound") {
    std::mt19937_64 rng(12003);
    const auto fam = sim::GraphFamily::from_graphs({testsup::random_strongly_connected(rng, 4),
                                                    testsup::random_strongly_connected(rng, 4)});
    REQUIRE(fam.all_strongly_connected);
    Vector x0 = testsup::random_matrix(rng, 4, 1).col(0);
    const auto schedule = sim::generate_schedule(5150, 2, 0.5, 1.0, 8.0);
    const double gamma = 4.0 / fam.lambda2_min;
    const auto rep = cert::contraction_directed(fam, schedule, gamma, 0.2, x0);
    CHECK(rep.bounds_satisfied);
    CHECK(rep.xi_bar_history.size() == rep.per_interval.size());
    for (const auto& f : rep.per_interval) {
        if (f.eig_bound_valid) {
            CHECK(std::exp(0.2 * f.h) * f.factor <= f.eig_bound * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("boundary counterexample: zero drift without coupling") {
    const auto fam = reference_family();
    const auto demo = cert::boundary_counterexample(fam, 0.0, 1.0, 50.0);
    CHECK(demo.gamma1 == 0.0);
    CHECK(demo.max_drift < 1e-12);
}

TEST_CASE("boundary counterexample: two-node threshold gain keeps the deviation flat") {
    const auto fam = sim::GraphFamily::from_graphs({Digraph::undirected(2, {{0, 1, 0.1}})});
    const auto demo = cert::boundary_counterexample(fam, 0.2, 1.0, 100.0);
    CHECK(demo.lambda2 == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(demo.gamma1 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(demo.max_drift < 1e-6);
    CHECK(demo.deviation_norms.back() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("boundary counterexample: one percent above the threshold decays") {
    const auto fam = sim::GraphFamily::from_graphs({Digraph::undirected(2, {{0, 1, 0.1}})});
    const auto demo = cert::boundary_counterexample(fam, 0.2, 1.0, 100.0, 1.01);
    CHECK(demo.deviation_norms.back() < 0.9 * demo.deviation_norms.front());
}

TEST_CASE("jordan reduction: order one is the plain diagonal engine") {
    std::mt19937_64 rng(12004);
    const auto fam = sim::GraphFamily::from_graphs({testsup::random_connected_undirected(rng, 4)});
    const Matrix x0 = testsup::random_matrix(rng, 1, 4);
    const auto schedule = sim::generate_schedule(rng(), 1, 0.5, 1.0, 5.0);
    const auto rep = cert::jordan_reduction_check(0.2, 1, 1.5, fam, schedule, x0);
    CHECK(rep.closed_vs_kron < 1e-10);
    CHECK(rep.closed_vs_ode < 1e-7);
}

TEST_CASE("jordan reduction: polynomial factors still converge for lambda = 0") {
    const auto fam = sim::GraphFamily::from_graphs(
        {Digraph::undirected(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}})});
    Matrix x0(2, 3);
    x0 << 4.0, -1.0, 2.0, 1.0, 3.0, -2.0;
    const auto schedule = sim::constant_schedule(0, 1.0, 25.0);
    const auto rep = cert::jordan_reduction_check(0.0, 2, 2.0, fam, schedule, x0);
    CHECK(rep.closed_vs_kron < 1e-8);
    CHECK(rep.closed_vs_ode < 1e-5);
    CHECK(rep.consensus_reached);
    CHECK(rep.final_spread < 1e-6);
    // spread rises with the polynomial factor before the exponential wins
    CHECK(rep.spread.front() > rep.spread.back());
}

TEST_CASE("jordan reduction: the reference Jordan system under switching") {
    const auto fam = reference_family();
    std::mt19937_64 rng(12005);
    const Matrix x0 = testsup::random_matrix(rng, 2, 4, 5.0);
    const auto schedule = sim::generate_schedule(777, 4, 0.5, 1.0, 100.0);
    const auto rep = cert::jordan_reduction_check(0.1, 2, 2.5, fam, schedule, x0);
    CHECK(rep.closed_vs_kron < 1e-8);
    CHECK(rep.consensus_reached);
}

TEST_CASE("kronecker oracle: diagonal inputs stay block-diagonal") {
    const auto fam = reference_family();
    const int n = 2, m = 4;
    CMatrix S = CMatrix::Zero(n, n);
    S(0, 0) = Complex(0.3, 0.0);
    S(1, 1) = Complex(-0.2, 0.0);
    const std::vector<double> gamma{1.0, 2.0};
    CMatrix Gamma = CMatrix::Zero(n, n);
    Gamma(0, 0) = gamma[0];
    Gamma(1, 1) = gamma[1];
    const CMatrix M = linalg::kron(S, CMatrix(CMatrix::Identity(m, m))) -
                      linalg::kron(Gamma, CMatrix(fam.members[0].L.cast<Complex>()));
    const CMatrix E = linalg::expm(M, 0.9);
    CHECK(E.block(0, m, m, m).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(E.block(m, 0, m, m).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("kronecker oracle: size guard") {
    const auto fam = reference_family();
    const CMatrix S = CMatrix::Identity(16, 16);
    const CMatrix x0 = CMatrix::Zero(16, 4);
    CHECK_THROWS_AS(cert::oracle_full_kronecker(S, std::vector<double>(16, 1.0), fam,
                                                sim::constant_schedule(0, 1.0, 1.0), x0),
                    DimensionError);
}

TEST_CASE("exponential fit recovers a synthetic rate") {
    std::vector<double> times, values;
    for (int k = 0; k < 20; ++k) {
        times.push_back(0.5 * k);
        values.push_back(3.0 * std::exp(-0.7 * 0.5 * k));
    }
    const auto fit = cert::fit_exponential(times, values);
    CHECK(fit.rate == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(fit.prefactor == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(fit.points_used == 20);
}
