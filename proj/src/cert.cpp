#include "consensus/cert.hpp"

#include "consensus/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

namespace consensus::cert {

namespace {

double spectral_norm(const Matrix& M) {
    Eigen::JacobiSVD<Matrix> svd(M);
    return svd.singularValues()[0];
}

// Unit Fiedler vector of an undirected Laplacian with a deterministic sign.
Vector fiedler_vector(const Matrix& L) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(L);
    if (solver.info() != Eigen::Success) {
        throw NumericError("fiedler_vector: eigensolver failed");
    }
    Vector v = solver.eigenvectors().col(1);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) > 1e-8) {
            if (v[i] < 0.0) {
                v = -v;
            }
            break;
        }
    }
    return v / v.norm();
}

struct IntervalSpan {
    double t_start = 0.0;
    double t_end = 0.0;
    double h = 0.0;
    int mode = 0;
};

std::vector<IntervalSpan> active_intervals(const sim::Schedule& schedule) {
    std::vector<IntervalSpan> spans;
    for (int k = 0; k < schedule.intervals(); ++k) {
        IntervalSpan s;
        s.t_start = schedule.switch_times[static_cast<std::size_t>(k)];
        s.t_end = std::min(schedule.switch_times[static_cast<std::size_t>(k) + 1],
                           schedule.horizon);
        s.h = s.t_end - s.t_start;
        s.mode = schedule.modes[static_cast<std::size_t>(k)];
        if (!(s.h > 0.0)) {
            break;
        }
        spans.push_back(s);
        if (s.t_end >= schedule.horizon) {
            break;
        }
    }
    return spans;
}

}  // namespace

StochasticCheck check_doubly_stochastic(const graph::LaplacianMatrix& L, double gamma,
                                        double h) {
    if (!(gamma > 0.0) || !(h > 0.0)) {
        throw std::invalid_argument("check_doubly_stochastic: gamma and h must be positive");
    }
    const int m = L.size();
    const Matrix W = linalg::expm(Matrix(-gamma * L.L), h);

    StochasticCheck out;
    out.symmetry_residual = (W - W.transpose()).cwiseAbs().maxCoeff();
    out.row_sum_residual = (W.rowwise().sum() - Vector::Ones(m)).cwiseAbs().maxCoeff();
    out.col_sum_residual = (W.colwise().sum().transpose() - Vector::Ones(m))
                               .cwiseAbs()
                               .maxCoeff();
    out.min_entry = W.minCoeff();

    Eigen::EigenSolver<Matrix> solver(W, /*computeEigenvectors=*/false);
    Vector moduli = solver.eigenvalues().cwiseAbs();
    std::sort(moduli.data(), moduli.data() + moduli.size(), std::greater<double>());
    out.second_modulus = m >= 2 ? moduli[1] : 0.0;
    out.unit_eigenvalue_simple =
        std::abs(moduli[0] - 1.0) <= 1e-10 && (m < 2 || moduli[1] <= 1.0 - 1e-12);
    return out;
}

ContractionReport contraction_undirected(const sim::GraphFamily& family,
                                         const sim::Schedule& schedule, double gamma1,
                                         double lambdaA1, const Vector& x0) {
    if (!family.all_undirected) {
        throw std::invalid_argument("contraction_undirected: family must be undirected");
    }
    const int m = family.agent_count;
    if (x0.size() != m) {
        throw DimensionError("contraction_undirected: x0 must have one entry per agent");
    }

    const Matrix P = Matrix::Constant(m, m, 1.0 / m);
    const double mean0 = x0.mean();
    const double x0_norm = x0.norm();
    const double rate = gamma1 * family.lambda2_min - lambdaA1;
    const double t0 = schedule.switch_times.front();

    ContractionReport rep;
    rep.consensus_direction = Vector::Constant(m, 1.0 / m);
    Vector x = x0;
    double cumulative = 1.0;
    Matrix prev_D;
    bool ok = true;

    for (const IntervalSpan& s : active_intervals(schedule)) {
        const Matrix W = linalg::expm(Matrix(-gamma1 * family.members[
                                                 static_cast<std::size_t>(s.mode)].L),
                                      s.h);
        const Matrix D = W - P;

        IntervalFactor f;
        f.mode = s.mode;
        f.h = s.h;
        f.factor = spectral_norm(D);
        f.factor_frobenius = D.norm();
        const double lam2 = family.summaries[static_cast<std::size_t>(s.mode)].lambda2.real();
        const double expected = std::exp(-gamma1 * lam2 * s.h);
        rep.max_factor_error = std::max(rep.max_factor_error, std::abs(f.factor - expected));
        f.eig_bound = std::exp(lambdaA1 * s.h) * expected;
        f.eig_bound_valid = true;
        rep.per_interval.push_back(f);

        if (prev_D.size() > 0) {
            const Matrix lhs = (D + P) * (prev_D + P);
            const Matrix rhs = D * prev_D + P;
            rep.telescoping_residual =
                std::max(rep.telescoping_residual, (lhs - rhs).cwiseAbs().maxCoeff());
        }
        prev_D = D;

        x = std::exp(lambdaA1 * s.h) * (W * x);
        const double t_rel = s.t_end - t0;
        const double observed =
            (x - std::exp(lambdaA1 * t_rel) * mean0 * Vector::Ones(m)).norm();
        cumulative *= std::exp(lambdaA1 * s.h) * f.factor;

        rep.times.push_back(s.t_end);
        rep.observed_deviation.push_back(observed);
        rep.product_bound.push_back(cumulative * x0_norm);
        rep.omega_bound.push_back(std::exp(-rate * t_rel) * x0_norm);

        const double tol = 1.0 + 1e-9;
        for (const double bound : {rep.product_bound.back(), rep.omega_bound.back()}) {
            if (observed > bound * tol) {
                ok = false;
                rep.max_bound_violation = std::max(
                    rep.max_bound_violation, (observed - bound) / std::max(x0_norm, 1e-300));
            }
        }
    }

    const ExponentialFit fit = fit_exponential(rep.times, rep.observed_deviation);
    rep.fitted_rate = fit.rate;
    rep.fitted_prefactor = fit.prefactor;
    rep.bounds_satisfied = ok;
    return rep;
}

ContractionReport contraction_directed(const sim::GraphFamily& family,
                                       const sim::Schedule& schedule, double gamma1,
                                       double lambdaA1, const Vector& x0) {
    const int m = family.agent_count;
    if (x0.size() != m) {
        throw DimensionError("contraction_directed: x0 must have one entry per agent");
    }

    const double x0_norm = x0.norm();
    const double t0 = schedule.switch_times.front();

    ContractionReport rep;
    Vector x = x0;
    Vector xi_bar = Vector::Zero(m);
    Matrix b_prod = Matrix::Identity(m, m);  // B(k-1)...B(0), I before the first interval
    double cumulative = 1.0;
    bool ok = true;

    for (const IntervalSpan& s : active_intervals(schedule)) {
        const graph::LaplacianMatrix& lap = family.members[static_cast<std::size_t>(s.mode)];
        const Matrix W = linalg::expm(Matrix(-gamma1 * lap.L), s.h);
        const Vector& xi = family.summaries[static_cast<std::size_t>(s.mode)].left1;
        const Matrix B = W - Vector::Ones(m) * xi.transpose();

        IntervalFactor f;
        f.mode = s.mode;
        f.h = s.h;
        f.factor = spectral_norm(B);
        f.factor_frobenius = B.norm();

        // Eigendecomposition bound on e^{lambda_A h} ||B||: sum over the
        // non-kernel modes of ||q_i|| ||p_i|| e^{-(gamma Re(lambda_i) - lambda_A) h}.
        const linalg::EigenDecomp d = linalg::eig(lap.L);
        if (!d.near_defective()) {
            int kernel = 0;
            double best = std::abs(d.values[0]);
            for (int i = 1; i < m; ++i) {
                if (std::abs(d.values[i]) < best) {
                    best = std::abs(d.values[i]);
                    kernel = i;
                }
            }
            double bound = 0.0;
            for (int i = 0; i < m; ++i) {
                if (i == kernel) {
                    continue;
                }
                const double coeff =
                    d.right_vectors.col(i).norm() * d.left_vectors.row(i).norm();
                bound += coeff *
                         std::exp(-(gamma1 * d.values[i].real() - lambdaA1) * s.h);
            }
            f.eig_bound = bound;
            f.eig_bound_valid = true;
        } else {
            f.eig_bound = std::exp(lambdaA1 * s.h) * f.factor;
            f.eig_bound_valid = false;
        }
        rep.per_interval.push_back(f);

        // xi_bar_k' = xi_0' + xi_1' B(0) + ... + xi_k' B(k-1)...B(0)
        xi_bar += b_prod.transpose() * xi;
        b_prod = B * b_prod;
        rep.xi_bar_history.push_back(xi_bar);

        x = std::exp(lambdaA1 * s.h) * (W * x);
        const double t_rel = s.t_end - t0;
        const double target = xi_bar.dot(x0);
        const double observed =
            (x - std::exp(lambdaA1 * t_rel) * target * Vector::Ones(m)).norm();
        cumulative *= std::exp(lambdaA1 * s.h) * f.factor;

        rep.times.push_back(s.t_end);
        rep.observed_deviation.push_back(observed);
        rep.product_bound.push_back(cumulative * x0_norm);

        if (observed > rep.product_bound.back() * (1.0 + 1e-9)) {
            ok = false;
            rep.max_bound_violation =
                std::max(rep.max_bound_violation,
                         (observed - rep.product_bound.back()) / std::max(x0_norm, 1e-300));
        }
    }

    rep.consensus_direction = xi_bar;
    const ExponentialFit fit = fit_exponential(rep.times, rep.observed_deviation);
    rep.fitted_rate = fit.rate;
    rep.fitted_prefactor = fit.prefactor;
    rep.bounds_satisfied = ok;
    return rep;
}

BoundaryDemo boundary_counterexample(const sim::GraphFamily& family, double lambdaA1,
                                     double dwell, double horizon, double gamma_scale) {
    if (!family.all_undirected) {
        throw std::invalid_argument("boundary_counterexample: family must be undirected");
    }
    if (!(dwell > 0.0) || !(horizon > 0.0)) {
        throw std::invalid_argument("boundary_counterexample: dwell/horizon must be positive");
    }

    BoundaryDemo demo;
    demo.lambda2 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < family.size(); ++i) {
        const double lam2 = family.summaries[static_cast<std::size_t>(i)].lambda2.real();
        if (lam2 < demo.lambda2) {
            demo.lambda2 = lam2;
            demo.critical_member = i;
        }
    }
    const Matrix& L = family.members[static_cast<std::size_t>(demo.critical_member)].L;
    const int m = family.agent_count;

    demo.gamma1 = gamma_scale * (lambdaA1 / demo.lambda2);
    demo.x0 = fiedler_vector(L);

    const Matrix P = Matrix::Constant(m, m, 1.0 / m);
    const Matrix W =
        demo.gamma1 == 0.0 ? Matrix(Matrix::Identity(m, m))
                           : linalg::expm(Matrix(-demo.gamma1 * L), dwell);
    // Propagating the deviation through D = W - P keeps the consensus
    // component out of the recursion, which would otherwise re-enter through
    // rounding and be amplified by e^{lambda_A t}.
    const Matrix D = W - P;
    const double growth = std::exp(lambdaA1 * dwell);

    Vector delta = demo.x0;
    demo.times.push_back(0.0);
    demo.deviation_norms.push_back(delta.norm());
    double t = 0.0;
    while (t < horizon) {
        delta = growth * (D * delta);
        t += dwell;
        demo.times.push_back(t);
        demo.deviation_norms.push_back(delta.norm());
    }
    for (const double v : demo.deviation_norms) {
        demo.max_drift = std::max(demo.max_drift, std::abs(v - demo.deviation_norms.front()));
    }
    return demo;
}

JordanReductionReport jordan_reduction_check(double lambda, int order, double gamma,
                                    const sim::GraphFamily& family,
                                    const sim::Schedule& schedule, const Matrix& x0,
                                    double ode_step, double spread_tol) {
    if (order < 1) {
        throw std::invalid_argument("jordan_reduction_check: order must be >= 1");
    }
    const int m = family.agent_count;
    if (x0.rows() != order || x0.cols() != m) {
        throw DimensionError("jordan_reduction_check: x0 must be order x m");
    }

    // Closed form: one Jordan block with a shared gain.
    design::ModalForm shim;
    shim.Q = CMatrix::Identity(order, order);
    shim.Q_inv = shim.Q;
    shim.S_diag = CVector::Constant(order, Complex(lambda, 0.0));
    shim.unstable_count = lambda > -1e-12 ? order : 0;
    shim.blocks.push_back({Complex(lambda, 0.0), order});
    shim.vector_condition = 1.0;
    const std::vector<double> gains(static_cast<std::size_t>(order), gamma);
    const CMatrix x0c = x0.cast<Complex>();
    const sim::ModalTrajectory closed =
        sim::propagate_modal_closed_form(shim, gains, family, schedule, x0c);

    // Independent route: full Kronecker exponential of the Jordan system.
    CMatrix J = CMatrix::Zero(order, order);
    for (int i = 0; i < order; ++i) {
        J(i, i) = Complex(lambda, 0.0);
        if (i + 1 < order) {
            J(i, i + 1) = Complex(1.0, 0.0);
        }
    }
    const sim::ModalTrajectory kron_traj =
        oracle_full_kronecker(J, gains, family, schedule, x0c);

    // Third route: RK4 on dX = J X - gamma X L'.
    const Matrix Jr = J.real();
    const double dt_target = ode_step > 0.0
                                 ? ode_step
                                 : std::min(schedule.dwell_floor / 50.0, 1e-2);
    Matrix X = x0;
    std::vector<Matrix> ode_samples{X};
    for (const IntervalSpan& s : active_intervals(schedule)) {
        const Matrix Lt =
            family.members[static_cast<std::size_t>(s.mode)].L.transpose();
        const int substeps = std::max(1, static_cast<int>(std::ceil(s.h / dt_target)));
        const double dt = s.h / substeps;
        const auto deriv = [&](const Matrix& Xc) { return Matrix(Jr * Xc - gamma * Xc * Lt); };
        for (int i = 0; i < substeps; ++i) {
            const Matrix k1 = deriv(X);
            const Matrix k2 = deriv(X + 0.5 * dt * k1);
            const Matrix k3 = deriv(X + 0.5 * dt * k2);
            const Matrix k4 = deriv(X + dt * k3);
            X += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        ode_samples.push_back(X);
    }

    JordanReductionReport rep;
    rep.times = closed.times;
    for (std::size_t i = 0; i < closed.states.size(); ++i) {
        const CMatrix& ref = closed.states[i];
        const double scale = std::max(1.0, ref.norm());
        rep.closed_vs_kron = std::max(
            rep.closed_vs_kron, (ref - kron_traj.states[i]).norm() / scale);
        if (i < ode_samples.size()) {
            rep.closed_vs_ode = std::max(
                rep.closed_vs_ode,
                (ref - ode_samples[i].cast<Complex>()).norm() / scale);
        }
        double spread = 0.0;
        for (int q = 0; q < ref.rows(); ++q) {
            for (int a = 0; a < m; ++a) {
                for (int b = a + 1; b < m; ++b) {
                    spread = std::max(spread, std::abs(ref(q, a) - ref(q, b)));
                }
            }
        }
        rep.spread.push_back(spread);
    }
    rep.final_spread = rep.spread.back();
    rep.consensus_reached = rep.final_spread < spread_tol;
    return rep;
}

sim::ModalTrajectory oracle_full_kronecker(const CMatrix& S, const std::vector<double>& gamma,
                                           const sim::GraphFamily& family,
                                           const sim::Schedule& schedule, const CMatrix& x0) {
    const int n = static_cast<int>(S.rows());
    const int m = family.agent_count;
    if (S.cols() != n) {
        throw DimensionError("oracle_full_kronecker: S must be square");
    }
    if (static_cast<int>(gamma.size()) != n || x0.rows() != n || x0.cols() != m) {
        throw DimensionError("oracle_full_kronecker: gamma/x0 sizes must match S");
    }
    if (n * m > 60) {
        throw DimensionError("oracle_full_kronecker: n * m must be at most 60");
    }

    CMatrix Gamma = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        Gamma(i, i) = Complex(gamma[static_cast<std::size_t>(i)], 0.0);
    }
    const CMatrix I_m = CMatrix::Identity(m, m);

    CVector xhat(n * m);
    for (int i = 0; i < n; ++i) {
        xhat.segment(i * m, m) = x0.row(i).transpose();
    }

    sim::ModalTrajectory out;
    const auto record = [&](double t) {
        CMatrix X(n, m);
        for (int i = 0; i < n; ++i) {
            X.row(i) = xhat.segment(i * m, m).transpose();
        }
        out.times.push_back(t);
        out.states.push_back(std::move(X));
    };
    record(schedule.switch_times.front());

    for (const IntervalSpan& s : active_intervals(schedule)) {
        const CMatrix Lc =
            family.members[static_cast<std::size_t>(s.mode)].L.cast<Complex>();
        const CMatrix M = linalg::kron(S, I_m) - linalg::kron(Gamma, Lc);
        xhat = linalg::expm(M, s.h) * xhat;
        record(s.t_end);
    }
    return out;
}

ExponentialFit fit_exponential(const std::vector<double>& times,
                               const std::vector<double>& values) {
    ExponentialFit fit;
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < times.size() && i < values.size(); ++i) {
        if (!(values[i] > 0.0) || !std::isfinite(values[i]) || !std::isfinite(times[i])) {
            continue;
        }
        const double y = std::log(values[i]);
        st += times[i];
        sy += y;
        stt += times[i] * times[i];
        sty += times[i] * y;
        ++count;
    }
    fit.points_used = count;
    if (count < 2) {
        return fit;
    }
    const double denom = count * stt - st * st;
    if (denom == 0.0) {
        return fit;
    }
    const double slope = (count * sty - st * sy) / denom;
    const double intercept = (sy - slope * st) / count;
    fit.rate = -slope;
    fit.prefactor = std::exp(intercept);
    return fit;
}

}  // namespace consensus::cert
