#pragma once

#include <vector>

#include "swingup/hilbert.hpp"

namespace swingup {

struct Trajectory;

// Snapshot of the recorded expectation values at one sample time.
// excitation = p_x + n1_mean + n2_mean always holds by construction.
struct ObservableSet {
    double p_x = 0.0;
    double n1_mean = 0.0;
    double n2_mean = 0.0;
    double excitation = 0.0;
    double norm_drift = 0.0;  // max pre-renormalization |norm - 1| since last sample
};

// P_X = <sigma^dag sigma>: total probability of the excited emitter level.
double exciton_population(const StateVector& state);

// <a_j^dag a_j> for mode 1 or 2.
double mean_photon_number(const StateVector& state, int mode);

// <N> = P_X + <n1> + <n2>, the conserved excitation number.
double excitation_number(const StateVector& state);

// Marginal photon-number distribution of one mode over its window; sums to 1
// for a normalized state. Index i corresponds to n = window.n_min + i.
std::vector<double> number_distribution(const StateVector& state, int mode);

ObservableSet measure(const StateVector& state, double norm_drift = 0.0);

// |<target|state>|^2. With optimize_relative_phase set the target must have
// exactly two nonvanishing components; the overlap is then maximized over
// the relative phase between them.
double fidelity(const StateVector& state, const StateVector& target,
                bool optimize_relative_phase = false);

// Final minus initial mean photon number of one mode over a trajectory.
double photon_variation(const Trajectory& traj, int mode);

// Strict local maxima of a sampled series, ignoring wiggles smaller than
// min_prominence (rise before and fall after must both exceed it). Used to
// tell the monotonic Fock swing-up from the oscillatory coherent one.
int count_local_maxima(const std::vector<double>& series, double min_prominence);

}  // namespace swingup
