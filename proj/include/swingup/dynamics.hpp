#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "swingup/hilbert.hpp"
#include "swingup/observables.hpp"

namespace swingup {

// Gaussian pulse envelope exp(-tau^2) in dimensionless time tau = t / t_p.
double envelope(double tau);

// All parameters are dimensionless: time in units of the pulse duration t_p,
// detunings Delta_j = t_p * delta_j, couplings G_j = t_p * g_j, hbar = 1.
struct SimConfig {
    double delta1 = 0.0;
    double delta2 = 0.0;
    double g1 = 0.0;
    double g2 = 0.0;
    EmitterLevel emitter_init = EmitterLevel::Ground;
    FieldInit field1 = FockInit{0};
    FieldInit field2 = FockInit{0};
    TruncationWindow window1;
    TruncationWindow window2;
    double dt = 1e-3;
    int record_stride = 100;
    double span_sigma = 3.0;  // integrate tau in [-span_sigma, +span_sigma]

    bool operator==(const SimConfig&) const = default;
};

// Throws ValidationError listing every violated invariant.
void validate(const SimConfig& cfg);

ProductBasis basis_of(const SimConfig& cfg);
StateVector initial_state(const SimConfig& cfg);

// Number of fixed RK4 steps covering [-span, +span] at the requested dt.
int step_count(const SimConfig& cfg);
// tau after k steps; exact at both endpoints.
double time_at(const SimConfig& cfg, int k);

// Worst-case integration health over a run. Window edges at n = 0 are the
// physical vacuum floor, not a truncation artifact, so boundary occupancy
// tracks the n_max edges always and the n_min edges only when n_min > 0;
// modes with zero coupling are inert and excluded.
struct ConvergenceReport {
    double max_norm_drift_per_step = 0.0;
    double max_excitation_drift = 0.0;
    double max_boundary_occupancy = 0.0;
    // mode-1 low, mode-1 high, mode-2 low, mode-2 high
    std::array<double, 4> max_edge_occupancy{};
    std::optional<double> step_halving_fidelity;  // filled by the dt/2 self-check
};

struct Trajectory {
    std::vector<double> times;
    std::vector<ObservableSet> observables;
    StateVector final_state;
    ConvergenceReport audit;
    std::vector<StateVector> snapshots;  // populated only on request
};

// Right-hand side -i H(tau) psi of the interaction-picture Schroedinger
// equation, H(tau) = sum_j G_j exp(-tau^2) (e^{-i Delta_j tau} sigma^dag a_j
// + e^{+i Delta_j tau} sigma a_j^dag).
StateVector rhs(const StateVector& state, double tau, const SimConfig& cfg);

// One classical RK4 update (stages at tau, tau + dt/2, tau + dt), output
// renormalized to unit norm.
StateVector rk4_step(const StateVector& state, double tau, double dt, const SimConfig& cfg);

struct EvolveOptions {
    bool record_states = false;      // keep a state snapshot at every sample
    bool step_halving_check = false; // rerun at dt/2 and report final fidelity
};

// Fixed-step RK4 from -span_sigma to +span_sigma, renormalizing each step,
// recording observables every record_stride steps (the final step is always
// recorded).
Trajectory evolve(const SimConfig& cfg, const EvolveOptions& options = {});

// Reference propagator: treats H as constant on sub-intervals of dt and
// applies the exact unitary exp(-i H h) of each midpoint Hamiltonian via
// Hermitian eigendecomposition. Exactly norm-preserving by construction;
// independent of the RK4 path. Dense: throws DimensionTooLarge above 2000.
StateVector oracle_propagate(const SimConfig& cfg, int substeps_per_dt);

// One piecewise-constant reference step: exp(-i H(tau + h/2) h) applied to
// the given state.
StateVector oracle_step(const StateVector& state, double tau, double h, const SimConfig& cfg);

struct AuditTolerances {
    double norm = 1e-8;        // per-step pre-renormalization |norm - 1|
    double excitation = 1e-6;  // drift of <N> from its initial value
    double boundary = 1e-6;    // probability on truncation-edge Fock states
};

struct AuditResult {
    bool pass = false;
    ConvergenceReport report;
    AuditTolerances tolerances;
    std::vector<std::string> saturated_edges;  // which window edges exceeded tolerance
    std::string summary() const;
};

AuditResult convergence_audit(const Trajectory& traj, const AuditTolerances& tol = {});

}  // namespace swingup
