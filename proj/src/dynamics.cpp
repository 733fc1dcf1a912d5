#include "swingup/dynamics.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "swingup/accum.hpp"

namespace swingup {

double envelope(double tau) { return std::exp(-tau * tau); }

void validate(const SimConfig& cfg) {
    std::vector<std::string> problems;
    auto bad = [&](const std::string& s) { problems.push_back(s); };

    if (!(cfg.span_sigma > 0.0)) bad("span_sigma must be positive");
    if (!(cfg.dt > 0.0)) bad("dt must be positive");
    if (cfg.span_sigma > 0.0 && cfg.dt > cfg.span_sigma / 10.0)
        bad("dt must not exceed span_sigma/10");
    if (cfg.record_stride < 1) bad("record_stride must be >= 1");
    if (cfg.g1 < 0.0) bad("g1 must be >= 0");
    if (cfg.g2 < 0.0) bad("g2 must be >= 0");

    auto check_window = [&](const TruncationWindow& w, const FieldInit& f, const char* name) {
        if (w.n_min < 0 || w.n_max < w.n_min) {
            bad(std::string(name) + " is not a valid truncation window");
            return;
        }
        const int occ = static_cast<int>(std::lround(mean_occupation(f)));
        if (!w.contains(occ)) {
            std::ostringstream os;
            os << name << " [" << w.n_min << ".." << w.n_max
               << "] does not contain the initial occupation " << occ;
            bad(os.str());
        }
    };
    check_window(cfg.window1, cfg.field1, "window1");
    check_window(cfg.window2, cfg.field2, "window2");

    if (!problems.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& p : problems) msg += "\n  - " + p;
        throw ValidationError(msg);
    }
}

ProductBasis basis_of(const SimConfig& cfg) { return build_basis(cfg.window1, cfg.window2); }

StateVector initial_state(const SimConfig& cfg) {
    return init_state(basis_of(cfg), cfg.emitter_init, cfg.field1, cfg.field2);
}

int step_count(const SimConfig& cfg) {
    return std::max(1, static_cast<int>(std::llround(2.0 * cfg.span_sigma / cfg.dt)));
}

double time_at(const SimConfig& cfg, int k) {
    const int n = step_count(cfg);
    return -cfg.span_sigma + (2.0 * cfg.span_sigma * k) / n;
}

namespace {

struct Workspace {
    std::vector<double> sq1, sq2;
    std::vector<cx> k1, k2, k3, k4, stage;

    explicit Workspace(const ProductBasis& basis)
        : sq1(detail::sqrt_table(basis.window1)),
          sq2(detail::sqrt_table(basis.window2)),
          k1(basis.dimension()),
          k2(basis.dimension()),
          k3(basis.dimension()),
          k4(basis.dimension()),
          stage(basis.dimension()) {}
};

// out = -i H(tau) in
void rhs_into(const SimConfig& cfg, const ProductBasis& basis, const Workspace& ws, double tau,
              const cx* in, cx* out) {
    std::fill(out, out + basis.dimension(), cx(0.0, 0.0));
    const double env = envelope(tau);
    const cx minus_i(0.0, -1.0);
    if (cfg.g1 != 0.0) {
        const cx phase = std::polar(1.0, -cfg.delta1 * tau);
        const cx cr = minus_i * cfg.g1 * env * phase;
        detail::add_raising_term(basis, 1, cr, ws.sq1, in, out, nullptr);
        detail::add_lowering_term(basis, 1, minus_i * cfg.g1 * env * std::conj(phase), ws.sq1,
                                  in, out, nullptr);
    }
    if (cfg.g2 != 0.0) {
        const cx phase = std::polar(1.0, -cfg.delta2 * tau);
        const cx cr = minus_i * cfg.g2 * env * phase;
        detail::add_raising_term(basis, 2, cr, ws.sq2, in, out, nullptr);
        detail::add_lowering_term(basis, 2, minus_i * cfg.g2 * env * std::conj(phase), ws.sq2,
                                  in, out, nullptr);
    }
}

// One RK4 update of psi in place; returns the pre-renormalization |norm - 1|.
double rk4_step_inplace(const SimConfig& cfg, const ProductBasis& basis, Workspace& ws,
                        double tau, double dt, std::vector<cx>& psi) {
    const int dim = basis.dimension();
    rhs_into(cfg, basis, ws, tau, psi.data(), ws.k1.data());
    for (int i = 0; i < dim; ++i) ws.stage[i] = psi[i] + (0.5 * dt) * ws.k1[i];
    rhs_into(cfg, basis, ws, tau + 0.5 * dt, ws.stage.data(), ws.k2.data());
    for (int i = 0; i < dim; ++i) ws.stage[i] = psi[i] + (0.5 * dt) * ws.k2[i];
    rhs_into(cfg, basis, ws, tau + 0.5 * dt, ws.stage.data(), ws.k3.data());
    for (int i = 0; i < dim; ++i) ws.stage[i] = psi[i] + dt * ws.k3[i];
    rhs_into(cfg, basis, ws, tau + dt, ws.stage.data(), ws.k4.data());

    const double w = dt / 6.0;
    detail::KahanSum norm2;
    for (int i = 0; i < dim; ++i) {
        psi[i] += w * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
        norm2.add(std::norm(psi[i]));
    }
    const double norm = std::sqrt(norm2.value());
    const double inv = 1.0 / norm;
    for (int i = 0; i < dim; ++i) psi[i] *= inv;
    return std::abs(norm - 1.0);
}

// Occupancy of the four window-edge slices (mode-1 low/high, mode-2 low/high).
std::array<double, 4> edge_occupancies(const ProductBasis& basis, const std::vector<cx>& amp) {
    const int m1 = basis.m1(), m2 = basis.m2(), block = basis.block();
    std::array<double, 4> occ{};
    for (int lev = 0; lev < 2; ++lev) {
        const cx* blk = amp.data() + lev * block;
        for (int b = 0; b < m2; ++b) {
            occ[0] += std::norm(blk[b]);
            occ[1] += std::norm(blk[(m1 - 1) * m2 + b]);
        }
        for (int a = 0; a < m1; ++a) {
            occ[2] += std::norm(blk[a * m2]);
            occ[3] += std::norm(blk[a * m2 + (m2 - 1)]);
        }
    }
    return occ;
}

}  // namespace

StateVector rhs(const StateVector& state, double tau, const SimConfig& cfg) {
    const ProductBasis basis = basis_of(cfg);
    if (state.basis != basis) throw BasisMismatch("rhs: state basis does not match config");
    Workspace ws(basis);
    StateVector out = zero_state(basis);
    rhs_into(cfg, basis, ws, tau, state.amplitudes.data(), out.amplitudes.data());
    return out;
}

StateVector rk4_step(const StateVector& state, double tau, double dt, const SimConfig& cfg) {
    const ProductBasis basis = basis_of(cfg);
    if (state.basis != basis) throw BasisMismatch("rk4_step: state basis does not match config");
    Workspace ws(basis);
    StateVector out = state;
    rk4_step_inplace(cfg, basis, ws, tau, dt, out.amplitudes);
    return out;
}

Trajectory evolve(const SimConfig& cfg, const EvolveOptions& options) {
    validate(cfg);
    const ProductBasis basis = basis_of(cfg);
    StateVector state = initial_state(cfg);
    Workspace ws(basis);

    const int n_steps = step_count(cfg);
    const double dt = 2.0 * cfg.span_sigma / n_steps;
    const int stride = cfg.record_stride;

    // Which window edges can actually truncate: upper edges of coupled modes,
    // lower edges of coupled modes when n_min > 0.
    const std::array<bool, 4> active = {
        cfg.g1 != 0.0 && cfg.window1.n_min > 0,
        cfg.g1 != 0.0,
        cfg.g2 != 0.0 && cfg.window2.n_min > 0,
        cfg.g2 != 0.0,
    };

    Trajectory traj;
    traj.times.reserve(n_steps / stride + 2);
    traj.observables.reserve(n_steps / stride + 2);

    double initial_excitation = 0.0;
    double drift_window = 0.0;
    auto record = [&](int k) {
        traj.times.push_back(time_at(cfg, k));
        ObservableSet obs = measure(state, drift_window);
        if (k == 0) initial_excitation = obs.excitation;
        traj.audit.max_excitation_drift = std::max(
            traj.audit.max_excitation_drift, std::abs(obs.excitation - initial_excitation));
        traj.observables.push_back(obs);
        if (options.record_states) traj.snapshots.push_back(state);
        drift_window = 0.0;
    };

    auto track_edges = [&] {
        const auto occ = edge_occupancies(basis, state.amplitudes);
        double boundary = 0.0;
        for (int e = 0; e < 4; ++e) {
            if (!active[e]) continue;
            traj.audit.max_edge_occupancy[e] = std::max(traj.audit.max_edge_occupancy[e], occ[e]);
            boundary += occ[e];
        }
        traj.audit.max_boundary_occupancy = std::max(traj.audit.max_boundary_occupancy, boundary);
    };

    record(0);
    track_edges();
    for (int k = 0; k < n_steps; ++k) {
        const double drift = rk4_step_inplace(cfg, basis, ws, time_at(cfg, k), dt,
                                              state.amplitudes);
        traj.audit.max_norm_drift_per_step = std::max(traj.audit.max_norm_drift_per_step, drift);
        drift_window = std::max(drift_window, drift);
        track_edges();
        if ((k + 1) % stride == 0 || k + 1 == n_steps) record(k + 1);
    }
    traj.final_state = std::move(state);

    if (options.step_halving_check) {
        SimConfig half = cfg;
        half.dt = cfg.dt / 2.0;
        const Trajectory fine = evolve(half);
        traj.audit.step_halving_fidelity = fidelity(traj.final_state, fine.final_state);
    }
    return traj;
}

namespace {

struct OracleWorkspace {
    std::vector<double> sq1, sq2;
    std::vector<cx> hmat, work, result;
    std::vector<double> eigvals;

    explicit OracleWorkspace(const ProductBasis& basis)
        : sq1(detail::sqrt_table(basis.window1)),
          sq2(detail::sqrt_table(basis.window2)),
          hmat(static_cast<size_t>(basis.dimension()) * basis.dimension()),
          work(basis.dimension()),
          result(basis.dimension()),
          eigvals(basis.dimension()) {}
};

// psi <- exp(-i H(tau_mid) h) psi via dense Hermitian eigendecomposition
void oracle_step_inplace(const SimConfig& cfg, const ProductBasis& basis, OracleWorkspace& ws,
                         double tau_mid, double h, std::vector<cx>& psi) {
    const int dim = basis.dimension();
    const int m1 = basis.m1(), m2 = basis.m2(), block = basis.block();
    const double env = envelope(tau_mid);

    auto set_pair = [&](int row, int col, cx v) {
        ws.hmat[static_cast<size_t>(row) * dim + col] = v;
        ws.hmat[static_cast<size_t>(col) * dim + row] = std::conj(v);
    };

    // H(tau) = sum_j G_j env (e^{-i Delta_j tau} sigma^dag a_j + h.c.)
    std::fill(ws.hmat.begin(), ws.hmat.end(), cx(0.0, 0.0));
    if (cfg.g1 != 0.0) {
        const cx c = cfg.g1 * env * std::polar(1.0, -cfg.delta1 * tau_mid);
        for (int a = 1; a < m1; ++a)
            for (int b = 0; b < m2; ++b)
                set_pair(block + (a - 1) * m2 + b, a * m2 + b, c * ws.sq1[a]);
    }
    if (cfg.g2 != 0.0) {
        const cx c = cfg.g2 * env * std::polar(1.0, -cfg.delta2 * tau_mid);
        for (int a = 0; a < m1; ++a)
            for (int b = 1; b < m2; ++b)
                set_pair(block + a * m2 + (b - 1), a * m2 + b, c * ws.sq2[b]);
    }

    const int info = LAPACKE_zheevd(
        LAPACK_ROW_MAJOR, 'V', 'L', dim,
        reinterpret_cast<lapack_complex_double*>(ws.hmat.data()), dim, ws.eigvals.data());
    if (info != 0) {
        std::ostringstream os;
        os << "oracle step: zheevd failed with info=" << info;
        throw std::runtime_error(os.str());
    }

    // psi <- V exp(-i w h) V^dag psi   (eigenvector k is column k of V)
    for (int k = 0; k < dim; ++k) {
        cx acc(0.0, 0.0);
        for (int i = 0; i < dim; ++i)
            acc += std::conj(ws.hmat[static_cast<size_t>(i) * dim + k]) * psi[i];
        ws.work[k] = acc * std::polar(1.0, -ws.eigvals[k] * h);
    }
    for (int i = 0; i < dim; ++i) {
        cx acc(0.0, 0.0);
        const cx* row = ws.hmat.data() + static_cast<size_t>(i) * dim;
        for (int k = 0; k < dim; ++k) acc += row[k] * ws.work[k];
        ws.result[i] = acc;
    }
    psi.swap(ws.result);
}

void check_dense_limit(int dim) {
    if (dim > 2000) {
        std::ostringstream os;
        os << "reference propagator: dimension " << dim << " exceeds the dense limit of 2000";
        throw DimensionTooLarge(os.str());
    }
}

}  // namespace

StateVector oracle_propagate(const SimConfig& cfg, int substeps_per_dt) {
    validate(cfg);
    if (substeps_per_dt < 1) throw std::invalid_argument("substeps_per_dt must be >= 1");
    const ProductBasis basis = basis_of(cfg);
    check_dense_limit(basis.dimension());

    StateVector state = initial_state(cfg);
    OracleWorkspace ws(basis);
    const long total = static_cast<long>(step_count(cfg)) * substeps_per_dt;
    const double h = 2.0 * cfg.span_sigma / total;
    for (long m = 0; m < total; ++m) {
        const double tau_mid = -cfg.span_sigma + (2.0 * cfg.span_sigma * (m + 0.5)) / total;
        oracle_step_inplace(cfg, basis, ws, tau_mid, h, state.amplitudes);
    }
    return state;
}

StateVector oracle_step(const StateVector& state, double tau, double h, const SimConfig& cfg) {
    const ProductBasis basis = basis_of(cfg);
    if (state.basis != basis)
        throw BasisMismatch("oracle_step: state basis does not match config");
    check_dense_limit(basis.dimension());
    OracleWorkspace ws(basis);
    StateVector out = state;
    oracle_step_inplace(cfg, basis, ws, tau + 0.5 * h, h, out.amplitudes);
    return out;
}

std::string AuditResult::summary() const {
    std::ostringstream os;
    os << (pass ? "PASS" : "FAIL") << " | max norm drift/step " << report.max_norm_drift_per_step
       << " (tol " << tolerances.norm << "), excitation drift " << report.max_excitation_drift
       << " (tol " << tolerances.excitation << "), boundary occupancy "
       << report.max_boundary_occupancy << " (tol " << tolerances.boundary << ")";
    if (!saturated_edges.empty()) {
        os << " | saturated:";
        for (const auto& e : saturated_edges) os << " " << e;
    }
    return os.str();
}

AuditResult convergence_audit(const Trajectory& traj, const AuditTolerances& tol) {
    AuditResult result;
    result.report = traj.audit;
    result.tolerances = tol;
    result.pass = traj.audit.max_norm_drift_per_step < tol.norm &&
                  traj.audit.max_excitation_drift < tol.excitation &&
                  traj.audit.max_boundary_occupancy < tol.boundary;
    static const char* kEdgeNames[4] = {"mode1:n_min", "mode1:n_max", "mode2:n_min",
                                        "mode2:n_max"};
    for (int e = 0; e < 4; ++e)
        if (traj.audit.max_edge_occupancy[e] > tol.boundary)
            result.saturated_edges.push_back(kEdgeNames[e]);
    return result;
}

}  // namespace swingup
