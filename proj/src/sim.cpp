#include "consensus/sim.hpp"

#include "consensus/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>

namespace consensus::sim {

namespace {

// Uniform draws derived from raw mt19937_64 words so schedules are
// reproducible across standard libraries.
double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int uniform_mode(std::mt19937_64& rng, int num_modes) {
    return static_cast<int>((static_cast<unsigned __int128>(rng()) *
                             static_cast<unsigned __int128>(num_modes)) >>
                            64);
}

double resolve_step(const Schedule& schedule, double step) {
    if (step == 0.0) {
        return std::min(schedule.dwell_floor / 50.0, 1e-2);
    }
    if (!(step > 0.0)) {
        throw std::invalid_argument("simulate: step must be positive");
    }
    if (step > schedule.dwell_floor / 10.0) {
        throw std::invalid_argument("simulate: step must be at most dwell_floor / 10");
    }
    return step;
}

void check_family_schedule(const GraphFamily& family, const Schedule& schedule) {
    if (family.members.empty()) {
        throw DimensionError("simulate: empty graph family");
    }
    for (int mode : schedule.modes) {
        if (mode < 0 || mode >= family.size()) {
            throw DimensionError("simulate: schedule references mode " + std::to_string(mode) +
                                 " outside the family");
        }
    }
}

}  // namespace

GraphFamily GraphFamily::from_graphs(const std::vector<graph::Digraph>& graphs) {
    std::vector<graph::LaplacianMatrix> laps;
    laps.reserve(graphs.size());
    for (const auto& g : graphs) {
        laps.push_back(graph::laplacian_of(g));
    }
    return from_laplacians(std::move(laps));
}

GraphFamily GraphFamily::from_laplacians(std::vector<graph::LaplacianMatrix> laplacians) {
    if (laplacians.empty()) {
        throw DimensionError("GraphFamily: at least one graph is required");
    }
    GraphFamily fam;
    fam.agent_count = laplacians.front().size();
    fam.all_undirected = true;
    fam.all_strongly_connected = true;
    fam.all_connected = true;
    fam.lambda2_min = std::numeric_limits<double>::infinity();
    for (const auto& lap : laplacians) {
        if (lap.size() != fam.agent_count) {
            throw DimensionError("GraphFamily: members must share the agent count");
        }
        fam.summaries.push_back(graph::spectral_summary(lap));
        fam.lambda2_min = std::min(fam.lambda2_min, fam.summaries.back().lambda2.real());
        fam.all_undirected = fam.all_undirected && lap.is_undirected();
        fam.all_strongly_connected =
            fam.all_strongly_connected && graph::is_strongly_connected(lap.source);
        fam.all_connected = fam.all_connected && graph::is_connected(lap.source);
    }
    fam.members = std::move(laplacians);
    return fam;
}

Schedule generate_schedule(std::uint64_t seed, int num_modes, double dwell_low,
                           double dwell_high, double horizon) {
    if (num_modes < 1) {
        throw std::invalid_argument("generate_schedule: need at least one mode");
    }
    if (!(dwell_low > 0.0) || !(dwell_high >= dwell_low)) {
        throw std::invalid_argument("generate_schedule: need 0 < dwell_low <= dwell_high");
    }
    if (!(horizon > 0.0)) {
        throw std::invalid_argument("generate_schedule: horizon must be positive");
    }
    std::mt19937_64 rng(seed);
    Schedule s;
    s.dwell_floor = dwell_low;
    s.horizon = horizon;
    s.switch_times.push_back(0.0);
    double t = 0.0;
    while (t < horizon) {
        const double h = dwell_low + (dwell_high - dwell_low) * uniform_unit(rng);
        const int mode = uniform_mode(rng, num_modes);
        t += h;
        s.switch_times.push_back(t);
        s.modes.push_back(mode);
    }
    return s;
}

Schedule constant_schedule(int mode, double dwell, double horizon) {
    if (!(dwell > 0.0) || !(horizon > 0.0)) {
        throw std::invalid_argument("constant_schedule: dwell and horizon must be positive");
    }
    Schedule s;
    s.dwell_floor = dwell;
    s.horizon = horizon;
    s.switch_times.push_back(0.0);
    double t = 0.0;
    while (t < horizon) {
        t += dwell;
        s.switch_times.push_back(t);
        s.modes.push_back(mode);
    }
    return s;
}

Schedule explicit_schedule(std::vector<double> switch_times, std::vector<int> modes,
                           double horizon) {
    if (switch_times.size() != modes.size() + 1 || modes.empty()) {
        throw std::invalid_argument("explicit_schedule: need K+1 switch times for K intervals");
    }
    double floor = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < switch_times.size(); ++k) {
        const double h = switch_times[k + 1] - switch_times[k];
        if (!(h > 0.0)) {
            throw std::invalid_argument("explicit_schedule: switch times must increase");
        }
        floor = std::min(floor, h);
    }
    if (switch_times.back() < horizon) {
        throw std::invalid_argument("explicit_schedule: schedule must cover the horizon");
    }
    Schedule s;
    s.switch_times = std::move(switch_times);
    s.modes = std::move(modes);
    s.dwell_floor = floor;
    s.horizon = horizon;
    return s;
}

ModalTrajectory propagate_modal_closed_form(const design::ModalForm& mf,
                                            const std::vector<double>& gamma,
                                            const GraphFamily& family,
                                            const Schedule& schedule, const CMatrix& x0) {
    const int n = mf.n();
    const int m = family.agent_count;
    if (static_cast<int>(gamma.size()) != n) {
        throw DimensionError("propagate_modal_closed_form: gamma size must equal n");
    }
    if (x0.rows() != n || x0.cols() != m) {
        throw DimensionError("propagate_modal_closed_form: x0 must be n x m");
    }
    check_family_schedule(family, schedule);

    // Per-block bookkeeping. Jordan blocks carry the cumulative product of
    // the per-interval exponentials and are re-expanded from the initial
    // state with the polynomial t-weights at every sample.
    struct BlockState {
        int start = 0;
        int size = 1;
        Complex lambda;
        double gamma = 0.0;
        CMatrix x0_block;  // size x m
        Matrix cumulative; // m x m, only for size > 1
    };
    std::vector<BlockState> blocks;
    int offset = 0;
    for (const auto& b : mf.blocks) {
        BlockState bs;
        bs.start = offset;
        bs.size = b.size;
        bs.lambda = b.eigenvalue;
        bs.gamma = gamma[static_cast<std::size_t>(offset)];
        for (int j = 1; j < b.size; ++j) {
            if (gamma[static_cast<std::size_t>(offset + j)] != bs.gamma) {
                throw NotApplicableError(
                    "propagate_modal_closed_form: a Jordan block needs one shared gain");
            }
        }
        if (b.size > 1) {
            bs.x0_block = x0.middleRows(offset, b.size);
            bs.cumulative = Matrix::Identity(m, m);
        }
        blocks.push_back(std::move(bs));
        offset += b.size;
    }

    ModalTrajectory out;
    const double t0 = schedule.switch_times.front();
    CMatrix X = x0;
    out.times.push_back(t0);
    out.states.push_back(X);

    for (int k = 0; k < schedule.intervals(); ++k) {
        const double t_start = schedule.switch_times[static_cast<std::size_t>(k)];
        const double t_sample =
            std::min(schedule.switch_times[static_cast<std::size_t>(k) + 1],
                     schedule.horizon);
        const double h = t_sample - t_start;
        if (!(h > 0.0)) {
            break;
        }
        const Matrix& L = family.members[static_cast<std::size_t>(
                                             schedule.modes[static_cast<std::size_t>(k)])].L;

        std::map<double, CMatrix> w_cache;
        const auto coupling = [&](double g) -> const CMatrix& {
            auto it = w_cache.find(g);
            if (it == w_cache.end()) {
                it = w_cache.emplace(g, linalg::expm(Matrix(-g * L), h).cast<Complex>()).first;
            }
            return it->second;
        };

        const double tau = t_sample - t0;
        for (auto& b : blocks) {
            if (b.size == 1) {
                const CMatrix& W = coupling(b.gamma);
                X.row(b.start) = std::exp(b.lambda * h) * (W * X.row(b.start).transpose())
                                                              .transpose();
            } else {
                b.cumulative = coupling(b.gamma).real() * b.cumulative;
                const CMatrix propagated =
                    b.x0_block * b.cumulative.transpose().cast<Complex>();
                const Complex growth = std::exp(b.lambda * tau);
                for (int j = 0; j < b.size; ++j) {
                    CVector row = CVector::Zero(m);
                    double weight = 1.0;
                    for (int p = 0; j + p < b.size; ++p) {
                        if (p > 0) {
                            weight *= tau / static_cast<double>(p);
                        }
                        row += weight * propagated.row(j + p).transpose();
                    }
                    X.row(b.start + j) = growth * row.transpose();
                }
            }
        }

        if (!X.allFinite()) {
            throw NumericError("propagate_modal_closed_form: state overflow at t = " +
                               std::to_string(t_sample));
        }
        out.times.push_back(t_sample);
        out.states.push_back(X);
        if (t_sample >= schedule.horizon) {
            break;
        }
    }
    return out;
}

double consensus_error(const Matrix& agent_states) {
    const int m = static_cast<int>(agent_states.rows());
    double worst = 0.0;
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            worst = std::max(worst,
                             (agent_states.row(i) - agent_states.row(j)).cwiseAbs().maxCoeff());
        }
    }
    return worst;
}

std::vector<double> consensus_error(const Trajectory& traj) {
    std::vector<double> out;
    out.reserve(traj.w.size());
    for (const auto& sample : traj.w) {
        out.push_back(consensus_error(sample));
    }
    return out;
}

namespace {

struct LoopMatrices {
    Matrix At;   // A'
    Matrix BKt;  // (B K)'
    Matrix Clt;  // (A + B K)'
    Matrix Pht;  // Phi'
    Matrix HCt;  // (H C)', observer only
};

// One RK4 step of the compensator loop in agent-major layout.
void rk4_compensator(const LoopMatrices& mats, const Matrix& L, double dt, Matrix& W,
                     Matrix& Eta) {
    const auto deriv = [&](const Matrix& Wc, const Matrix& Ec, Matrix& dW, Matrix& dE) {
        dW = Wc * mats.At + Ec * mats.BKt;
        dE = Ec * mats.Clt + (L * Wc - L * Ec) * mats.Pht;
    };
    Matrix k1w, k1e, k2w, k2e, k3w, k3e, k4w, k4e;
    deriv(W, Eta, k1w, k1e);
    deriv(W + 0.5 * dt * k1w, Eta + 0.5 * dt * k1e, k2w, k2e);
    deriv(W + 0.5 * dt * k2w, Eta + 0.5 * dt * k2e, k3w, k3e);
    deriv(W + dt * k3w, Eta + dt * k3e, k4w, k4e);
    W += dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
    Eta += dt / 6.0 * (k1e + 2.0 * k2e + 2.0 * k3e + k4e);
}

void rk4_observer(const LoopMatrices& mats, const Matrix& L, double dt, Matrix& W, Matrix& Wh,
                  Matrix& Eta) {
    const auto deriv = [&](const Matrix& Wc, const Matrix& Whc, const Matrix& Ec, Matrix& dW,
                           Matrix& dWh, Matrix& dE) {
        dW = Wc * mats.At + Ec * mats.BKt;
        dWh = Whc * mats.At + Ec * mats.BKt + (Whc - Wc) * mats.HCt;
        dE = Ec * mats.Clt + (L * Whc - L * Ec) * mats.Pht;
    };
    Matrix k1w, k1h, k1e, k2w, k2h, k2e, k3w, k3h, k3e, k4w, k4h, k4e;
    deriv(W, Wh, Eta, k1w, k1h, k1e);
    deriv(W + 0.5 * dt * k1w, Wh + 0.5 * dt * k1h, Eta + 0.5 * dt * k1e, k2w, k2h, k2e);
    deriv(W + 0.5 * dt * k2w, Wh + 0.5 * dt * k2h, Eta + 0.5 * dt * k2e, k3w, k3h, k3e);
    deriv(W + dt * k3w, Wh + dt * k3h, Eta + dt * k3e, k4w, k4h, k4e);
    W += dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
    Wh += dt / 6.0 * (k1h + 2.0 * k2h + 2.0 * k3h + k4h);
    Eta += dt / 6.0 * (k1e + 2.0 * k2e + 2.0 * k3e + k4e);
}

void check_loop_inputs(const design::AgentModel& model, const Matrix& K, const Matrix& Phi,
                       const GraphFamily& family, const Matrix& w0, const Matrix& eta0) {
    const int n = model.n();
    if (K.rows() != model.B.cols() || K.cols() != n) {
        throw DimensionError("simulate: K must be n_B x n");
    }
    if (Phi.rows() != n || Phi.cols() != n) {
        throw DimensionError("simulate: Phi must be n x n");
    }
    if (w0.rows() != family.agent_count || w0.cols() != n || eta0.rows() != w0.rows() ||
        eta0.cols() != n) {
        throw DimensionError("simulate: initial states must be m x n");
    }
}

}  // namespace

Trajectory simulate_compensator_loop(const design::AgentModel& model, const Matrix& K,
                                     const Matrix& Phi, const GraphFamily& family,
                                     const Schedule& schedule, const Matrix& w0,
                                     const Matrix& eta0, double step) {
    check_loop_inputs(model, K, Phi, family, w0, eta0);
    check_family_schedule(family, schedule);
    const double dt_target = resolve_step(schedule, step);

    LoopMatrices mats;
    mats.At = model.A.transpose();
    mats.BKt = (model.B * K).transpose();
    mats.Clt = (model.A + model.B * K).transpose();
    mats.Pht = Phi.transpose();

    Trajectory out;
    Matrix W = w0;
    Matrix Eta = eta0;
    const double t0 = schedule.switch_times.front();
    out.times.push_back(t0);
    out.w.push_back(W);
    out.eta.push_back(Eta);
    out.error.push_back(consensus_error(W));

    for (int k = 0; k < schedule.intervals(); ++k) {
        const double t_start = schedule.switch_times[static_cast<std::size_t>(k)];
        const double t_end = std::min(schedule.switch_times[static_cast<std::size_t>(k) + 1],
                                      schedule.horizon);
        const double seg = t_end - t_start;
        if (!(seg > 0.0)) {
            break;
        }
        const Matrix& L = family.members[static_cast<std::size_t>(
                                             schedule.modes[static_cast<std::size_t>(k)])].L;
        const int substeps = std::max(1, static_cast<int>(std::ceil(seg / dt_target)));
        const double dt = seg / substeps;
        for (int i = 1; i <= substeps; ++i) {
            rk4_compensator(mats, L, dt, W, Eta);
            const double t = t_start + dt * i;
            if (!W.allFinite() || !Eta.allFinite()) {
                throw DivergenceError("simulate_compensator_loop: state diverged", t);
            }
            out.times.push_back(t);
            out.w.push_back(W);
            out.eta.push_back(Eta);
            out.error.push_back(consensus_error(W));
        }
        if (t_end >= schedule.horizon) {
            break;
        }
    }
    return out;
}

Trajectory simulate_observer_loop(const design::AgentModel& model, const Matrix& K,
                                  const Matrix& H, const Matrix& Phi,
                                  const GraphFamily& family, const Schedule& schedule,
                                  const Matrix& w0, const Matrix& what0, const Matrix& eta0,
                                  double step) {
    check_loop_inputs(model, K, Phi, family, w0, eta0);
    check_family_schedule(family, schedule);
    if (!model.C) {
        throw DimensionError("simulate_observer_loop: model has no output matrix C");
    }
    if (H.rows() != model.n() || H.cols() != model.C->rows()) {
        throw DimensionError("simulate_observer_loop: H must be n x p");
    }
    if (what0.rows() != w0.rows() || what0.cols() != w0.cols()) {
        throw DimensionError("simulate_observer_loop: observer initial state must be m x n");
    }
    const double dt_target = resolve_step(schedule, step);

    LoopMatrices mats;
    mats.At = model.A.transpose();
    mats.BKt = (model.B * K).transpose();
    mats.Clt = (model.A + model.B * K).transpose();
    mats.Pht = Phi.transpose();
    mats.HCt = (H * (*model.C)).transpose();

    Trajectory out;
    Matrix W = w0;
    Matrix Wh = what0;
    Matrix Eta = eta0;
    const double t0 = schedule.switch_times.front();
    out.times.push_back(t0);
    out.w.push_back(W);
    out.w_hat.push_back(Wh);
    out.eta.push_back(Eta);
    out.error.push_back(consensus_error(W));

    for (int k = 0; k < schedule.intervals(); ++k) {
        const double t_start = schedule.switch_times[static_cast<std::size_t>(k)];
        const double t_end = std::min(schedule.switch_times[static_cast<std::size_t>(k) + 1],
                                      schedule.horizon);
        const double seg = t_end - t_start;
        if (!(seg > 0.0)) {
            break;
        }
        const Matrix& L = family.members[static_cast<std::size_t>(
                                             schedule.modes[static_cast<std::size_t>(k)])].L;
        const int substeps = std::max(1, static_cast<int>(std::ceil(seg / dt_target)));
        const double dt = seg / substeps;
        for (int i = 1; i <= substeps; ++i) {
            rk4_observer(mats, L, dt, W, Wh, Eta);
            const double t = t_start + dt * i;
            if (!W.allFinite() || !Wh.allFinite() || !Eta.allFinite()) {
                throw DivergenceError("simulate_observer_loop: state diverged", t);
            }
            out.times.push_back(t);
            out.w.push_back(W);
            out.w_hat.push_back(Wh);
            out.eta.push_back(Eta);
            out.error.push_back(consensus_error(W));
        }
        if (t_end >= schedule.horizon) {
            break;
        }
    }
    return out;
}

CVector asymptotic_consensus_value(const design::ModalForm& mf, const Vector& xi1,
                                   const Matrix& z0, double t) {
    const int n = mf.n();
    const int m = static_cast<int>(z0.rows());
    if (z0.cols() != n) {
        throw DimensionError("asymptotic_consensus_value: z0 must be m x n");
    }
    if (xi1.size() != m) {
        throw DimensionError("asymptotic_consensus_value: xi1 must have one entry per agent");
    }
    int mode = 0;
    for (const auto& b : mf.blocks) {
        if (mode >= mf.unstable_count) {
            break;
        }
        if (b.size > 1) {
            throw NotApplicableError(
                "asymptotic_consensus_value: unstable modes must be diagonalizable");
        }
        mode += b.size;
    }

    const CMatrix X0 = mf.Q_inv * z0.transpose().cast<Complex>();  // n x m
    CVector value = CVector::Zero(n);
    for (int i = 0; i < mf.unstable_count; ++i) {
        const Complex mu = X0.row(i) * xi1.cast<Complex>();
        value += mf.Q.col(i) * (std::exp(mf.S_diag[i] * t) * mu);
    }
    return value;
}

}  // namespace consensus::sim
