#include "swingup/observables.hpp"

#include <algorithm>
#include <cmath>

#include "swingup/accum.hpp"
#include "swingup/dynamics.hpp"

namespace swingup {

double exciton_population(const StateVector& state) {
    detail::KahanSum s;
    const int block = state.basis.block();
    for (int i = 0; i < block; ++i) s.add(std::norm(state.amplitudes[block + i]));
    return s.value();
}

// The marginal is accumulated mode-major (fixed n_j outer, level then the
// other mode inner) so that relabeling the two modes reproduces the swapped
// observable bit for bit.
std::vector<double> number_distribution(const StateVector& state, int mode) {
    if (mode != 1 && mode != 2) throw std::invalid_argument("mode must be 1 or 2");
    const ProductBasis& basis = state.basis;
    const int m1 = basis.m1(), m2 = basis.m2(), block = basis.block();
    const cx* amp = state.amplitudes.data();
    const int mj = (mode == 1) ? m1 : m2;
    std::vector<double> dist(mj);
    for (int j = 0; j < mj; ++j) {
        detail::KahanSum s;
        for (int lev = 0; lev < 2; ++lev) {
            const cx* blk = amp + lev * block;
            if (mode == 1) {
                for (int b = 0; b < m2; ++b) s.add(std::norm(blk[j * m2 + b]));
            } else {
                for (int a = 0; a < m1; ++a) s.add(std::norm(blk[a * m2 + j]));
            }
        }
        dist[j] = s.value();
    }
    return dist;
}

double mean_photon_number(const StateVector& state, int mode) {
    const auto dist = number_distribution(state, mode);
    const int n_min = (mode == 1) ? state.basis.window1.n_min : state.basis.window2.n_min;
    detail::KahanSum s;
    for (size_t i = 0; i < dist.size(); ++i) s.add((n_min + static_cast<int>(i)) * dist[i]);
    return s.value();
}

double excitation_number(const StateVector& state) {
    return exciton_population(state) + mean_photon_number(state, 1) +
           mean_photon_number(state, 2);
}

ObservableSet measure(const StateVector& state, double norm_drift) {
    ObservableSet obs;
    obs.p_x = exciton_population(state);
    obs.n1_mean = mean_photon_number(state, 1);
    obs.n2_mean = mean_photon_number(state, 2);
    obs.excitation = obs.p_x + obs.n1_mean + obs.n2_mean;
    obs.norm_drift = norm_drift;
    return obs;
}

double fidelity(const StateVector& state, const StateVector& target,
                bool optimize_relative_phase) {
    if (state.basis != target.basis) throw BasisMismatch("fidelity between different bases");
    const double ns = detail::norm_squared(state.amplitudes);
    const double nt = detail::norm_squared(target.amplitudes);
    if (ns == 0.0 || nt == 0.0) return 0.0;

    if (!optimize_relative_phase) {
        const cx overlap = target.inner(state);
        return std::norm(overlap) / (ns * nt);
    }

    // Locate the two nonvanishing target components; the optimum over their
    // relative phase is (|c1* s1| + |c2* s2|)^2.
    constexpr double kZeroTol = 1e-12;
    std::vector<int> support;
    for (size_t i = 0; i < target.amplitudes.size(); ++i)
        if (std::abs(target.amplitudes[i]) > kZeroTol) support.push_back(static_cast<int>(i));
    if (support.size() != 2)
        throw std::invalid_argument(
            "phase-optimized fidelity requires a target with exactly two components");
    const double part1 = std::abs(target.amplitudes[support[0]] * state.amplitudes[support[0]]);
    const double part2 = std::abs(target.amplitudes[support[1]] * state.amplitudes[support[1]]);
    const double f = (part1 + part2) * (part1 + part2) / (ns * nt);
    return std::min(f, 1.0);
}

double photon_variation(const Trajectory& traj, int mode) {
    if (traj.observables.empty()) throw std::invalid_argument("empty trajectory");
    const ObservableSet& first = traj.observables.front();
    const ObservableSet& last = traj.observables.back();
    return (mode == 1) ? last.n1_mean - first.n1_mean : last.n2_mean - first.n2_mean;
}

int count_local_maxima(const std::vector<double>& series, double min_prominence) {
    if (series.size() < 3) return 0;
    int count = 0;
    double valley = series.front();
    double peak = series.front();
    bool climbing = false;  // rose by more than the prominence, awaiting the fall
    for (size_t i = 1; i < series.size(); ++i) {
        const double v = series[i];
        if (!climbing) {
            valley = std::min(valley, v);
            if (v - valley > min_prominence) {
                climbing = true;
                peak = v;
            }
        } else {
            peak = std::max(peak, v);
            if (peak - v > min_prominence) {
                ++count;
                climbing = false;
                valley = v;
            }
        }
    }
    return count;
}

}  // namespace swingup
