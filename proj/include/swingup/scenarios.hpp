#pragma once

#include <optional>
#include <string>
#include <vector>

#include "swingup/dynamics.hpp"

namespace swingup {

enum class SweepParameter {
    Delta1,
    Delta2,
    G1,
    G2,
    N1Init,
    N2Init,
    Alpha1Sq,
    Alpha2Sq,
};

const char* to_string(SweepParameter p);
SweepParameter sweep_parameter_from_string(const std::string& name);
// Fock-occupation axes take integer values and recenter the mode window.
bool is_occupation_axis(SweepParameter p);

struct SweepAxis {
    SweepParameter parameter = SweepParameter::Delta2;
    std::vector<double> values;
};

SweepAxis linspace_axis(SweepParameter p, double lo, double hi, int count);
SweepAxis integer_axis(SweepParameter p, int lo, int hi, int step = 1);
// n = k^2 for k in [k_lo, k_hi]: integer occupations evenly spaced in sqrt(n),
// matching the plotting convention for field amplitudes.
SweepAxis squares_axis(SweepParameter p, int k_lo, int k_hi, int k_step = 1);

// base with one parameter substituted. Occupation axes keep the window
// half-width and recenter it on the new occupation; coherent-amplitude axes
// window to [0 .. mean + 10 sqrt(mean)].
SimConfig apply_axis_value(const SimConfig& base, SweepParameter p, double value);

struct SweepCell {
    ObservableSet final_obs;
    double delta_n1 = 0.0;
    double delta_n2 = 0.0;
    bool audit_pass = false;
    bool rerun_widened = false;  // audit failed once; re-run with doubled windows
    TruncationWindow window1, window2;  // windows actually used
    std::string error;                  // nonempty if the cell could not run
};

struct SweepGrid {
    SweepAxis axis_x, axis_y;
    std::vector<SweepCell> cells;  // row-major, axis_x fastest

    int nx() const { return static_cast<int>(axis_x.values.size()); }
    int ny() const { return static_cast<int>(axis_y.values.size()); }
    const SweepCell& at(int ix, int iy) const { return cells[static_cast<size_t>(iy) * nx() + ix]; }
    SweepCell& at(int ix, int iy) { return cells[static_cast<size_t>(iy) * nx() + ix]; }
};

struct SweepOptions {
    int threads = 1;
    AuditTolerances audit;
    bool rerun_widened = true;  // retry audit failures once with doubled windows
};

// One evolve per grid point. Cells are independent; execution order and
// thread count never change the stored results. Per-cell failures are
// recorded in the cell and the sweep continues.
SweepGrid run_sweep(const SimConfig& base, const SweepAxis& ax, const SweepAxis& ay,
                    const SweepOptions& options = {});

struct GridMaximum {
    int ix = 0, iy = 0;
    double x = 0.0, y = 0.0;
    double p_x = 0.0;
};

// Cells that strictly dominate their 8-neighborhood in final P_X and exceed
// the threshold, sorted by descending P_X (ties row-major).
std::vector<GridMaximum> locate_maxima(const SweepGrid& grid, double threshold);

// run_sweep, then extend an axis and fill in the new cells whenever the
// global maximum sits on a grid edge (previously computed cells are reused).
SweepGrid run_sweep_autowiden(const SimConfig& base, SweepAxis ax, SweepAxis ay,
                              const SweepOptions& options = {}, int max_rounds = 2);

struct Preset {
    std::string name;
    std::string description;
    SimConfig config;
    std::optional<SweepAxis> axis_x, axis_y;
};

const std::vector<std::string>& preset_names();
Preset preset(const std::string& name);

struct MinimumExcitationScan {
    double max_p_x = 0.0;
    double delta1_at_max = 0.0;
    double delta2_at_max = 0.0;
};

// Scans both detunings over [delta_lo, delta_hi] (same sign, |Delta| >= 2,
// i.e. strictly off-resonant) for an initial |G, n1, n2> product state and
// returns the largest final P_X found.
MinimumExcitationScan minimum_excitation_scan(double delta_lo, double delta_hi, double spacing,
                                              double g, int n1 = 1, int n2 = 0,
                                              const SweepOptions& options = {});

}  // namespace swingup
