#include "swingup/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>

namespace swingup {

const char* to_string(SweepParameter p) {
    switch (p) {
        case SweepParameter::Delta1: return "delta1";
        case SweepParameter::Delta2: return "delta2";
        case SweepParameter::G1: return "g1";
        case SweepParameter::G2: return "g2";
        case SweepParameter::N1Init: return "n1_init";
        case SweepParameter::N2Init: return "n2_init";
        case SweepParameter::Alpha1Sq: return "alpha1_sq";
        case SweepParameter::Alpha2Sq: return "alpha2_sq";
    }
    return "?";
}

SweepParameter sweep_parameter_from_string(const std::string& name) {
    for (auto p : {SweepParameter::Delta1, SweepParameter::Delta2, SweepParameter::G1,
                   SweepParameter::G2, SweepParameter::N1Init, SweepParameter::N2Init,
                   SweepParameter::Alpha1Sq, SweepParameter::Alpha2Sq})
        if (name == to_string(p)) return p;
    throw ParseError("unknown sweep parameter '" + name + "'");
}

bool is_occupation_axis(SweepParameter p) {
    return p == SweepParameter::N1Init || p == SweepParameter::N2Init;
}

SweepAxis linspace_axis(SweepParameter p, double lo, double hi, int count) {
    if (count < 1) throw std::invalid_argument("linspace_axis: count must be >= 1");
    SweepAxis axis{p, {}};
    axis.values.reserve(count);
    if (count == 1) {
        axis.values.push_back(lo);
        return axis;
    }
    for (int i = 0; i < count; ++i) axis.values.push_back(lo + (hi - lo) * i / (count - 1));
    return axis;
}

SweepAxis integer_axis(SweepParameter p, int lo, int hi, int step) {
    if (step < 1) throw std::invalid_argument("integer_axis: step must be >= 1");
    SweepAxis axis{p, {}};
    for (int v = lo; v <= hi; v += step) axis.values.push_back(static_cast<double>(v));
    return axis;
}

SweepAxis squares_axis(SweepParameter p, int k_lo, int k_hi, int k_step) {
    if (k_step < 1) throw std::invalid_argument("squares_axis: k_step must be >= 1");
    SweepAxis axis{p, {}};
    for (int k = k_lo; k <= k_hi; k += k_step)
        axis.values.push_back(static_cast<double>(k) * k);
    return axis;
}

namespace {

int occupation_center(const FieldInit& f) {
    return static_cast<int>(std::lround(mean_occupation(f)));
}

int window_half_width(const TruncationWindow& w, int center) {
    return std::max(center - w.n_min, w.n_max - center);
}

TruncationWindow coherent_window(double mean) {
    return {0, static_cast<int>(std::ceil(mean + 10.0 * std::sqrt(std::max(mean, 1.0))))};
}

void validate_axis(const SweepAxis& axis) {
    if (axis.values.empty()) throw std::invalid_argument("sweep axis has no values");
    for (size_t i = 1; i < axis.values.size(); ++i) {
        const bool increasing = axis.values[1] > axis.values[0];
        const double prev = axis.values[i - 1], cur = axis.values[i];
        if ((increasing && cur <= prev) || (!increasing && cur >= prev))
            throw std::invalid_argument(std::string("sweep axis over ") +
                                        to_string(axis.parameter) + " is not strictly monotone");
    }
    if (is_occupation_axis(axis.parameter)) {
        for (double v : axis.values)
            if (v < 0.0 || std::abs(v - std::round(v)) > 1e-9)
                throw std::invalid_argument("Fock occupation axis values must be integers >= 0");
    }
}

}  // namespace

SimConfig apply_axis_value(const SimConfig& base, SweepParameter p, double value) {
    SimConfig cfg = base;
    switch (p) {
        case SweepParameter::Delta1: cfg.delta1 = value; break;
        case SweepParameter::Delta2: cfg.delta2 = value; break;
        case SweepParameter::G1: cfg.g1 = value; break;
        case SweepParameter::G2: cfg.g2 = value; break;
        case SweepParameter::N1Init: {
            const int n = static_cast<int>(std::lround(value));
            const int hw = window_half_width(base.window1, occupation_center(base.field1));
            cfg.field1 = FockInit{n};
            cfg.window1 = centered_window(n, hw);
            break;
        }
        case SweepParameter::N2Init: {
            const int n = static_cast<int>(std::lround(value));
            const int hw = window_half_width(base.window2, occupation_center(base.field2));
            cfg.field2 = FockInit{n};
            cfg.window2 = centered_window(n, hw);
            break;
        }
        case SweepParameter::Alpha1Sq: {
            const auto* c = std::get_if<CoherentInit>(&base.field1);
            const double arg = c ? std::arg(c->alpha) : 0.0;
            const double tol = c ? c->trunc_tol : 1e-12;
            cfg.field1 = CoherentInit{std::polar(std::sqrt(value), arg), tol};
            cfg.window1 = coherent_window(value);
            break;
        }
        case SweepParameter::Alpha2Sq: {
            const auto* c = std::get_if<CoherentInit>(&base.field2);
            const double arg = c ? std::arg(c->alpha) : 0.0;
            const double tol = c ? c->trunc_tol : 1e-12;
            cfg.field2 = CoherentInit{std::polar(std::sqrt(value), arg), tol};
            cfg.window2 = coherent_window(value);
            break;
        }
    }
    return cfg;
}

namespace {

SimConfig widened(const SimConfig& cfg) {
    SimConfig wide = cfg;
    if (cfg.g1 != 0.0) {
        const int c = occupation_center(cfg.field1);
        wide.window1 = centered_window(c, std::max(2, 2 * window_half_width(cfg.window1, c)));
    }
    if (cfg.g2 != 0.0) {
        const int c = occupation_center(cfg.field2);
        wide.window2 = centered_window(c, std::max(2, 2 * window_half_width(cfg.window2, c)));
    }
    return wide;
}

SweepCell evaluate_cell(const SimConfig& cfg, const SweepOptions& options) {
    SweepCell cell;
    try {
        Trajectory traj = evolve(cfg);
        AuditResult audit = convergence_audit(traj, options.audit);
        SimConfig used = cfg;
        if (!audit.pass && options.rerun_widened) {
            used = widened(cfg);
            traj = evolve(used);
            audit = convergence_audit(traj, options.audit);
            cell.rerun_widened = true;
        }
        cell.final_obs = traj.observables.back();
        cell.delta_n1 = photon_variation(traj, 1);
        cell.delta_n2 = photon_variation(traj, 2);
        cell.audit_pass = audit.pass;
        cell.window1 = used.window1;
        cell.window2 = used.window2;
    } catch (const std::exception& e) {
        cell.error = e.what();
    }
    return cell;
}

}  // namespace

SweepGrid run_sweep(const SimConfig& base, const SweepAxis& ax, const SweepAxis& ay,
                    const SweepOptions& options) {
    validate_axis(ax);
    validate_axis(ay);
    if (ax.parameter == ay.parameter)
        throw std::invalid_argument("sweep axes must modify distinct parameters");

    SweepGrid grid;
    grid.axis_x = ax;
    grid.axis_y = ay;
    grid.cells.resize(static_cast<size_t>(grid.nx()) * grid.ny());

    auto run_cell = [&](int idx) {
        const int ix = idx % grid.nx();
        const int iy = idx / grid.nx();
        SimConfig cfg = apply_axis_value(base, ax.parameter, ax.values[ix]);
        cfg = apply_axis_value(cfg, ay.parameter, ay.values[iy]);
        grid.cells[idx] = evaluate_cell(cfg, options);
    };

    const int total = static_cast<int>(grid.cells.size());
    const int nthreads = std::max(1, options.threads);
    if (nthreads == 1) {
        for (int idx = 0; idx < total; ++idx) run_cell(idx);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (int t = 0; t < nthreads; ++t)
            pool.emplace_back([&] {
                for (int idx = next.fetch_add(1); idx < total; idx = next.fetch_add(1))
                    run_cell(idx);
            });
        for (auto& th : pool) th.join();
    }
    return grid;
}

std::vector<GridMaximum> locate_maxima(const SweepGrid& grid, double threshold) {
    std::vector<GridMaximum> maxima;
    const int nx = grid.nx(), ny = grid.ny();
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const SweepCell& cell = grid.at(ix, iy);
            if (!cell.error.empty()) continue;
            const double p = cell.final_obs.p_x;
            if (p <= threshold) continue;
            bool strict_max = true;
            for (int dy = -1; dy <= 1 && strict_max; ++dy) {
                for (int dx = -1; dx <= 1 && strict_max; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const int jx = ix + dx, jy = iy + dy;
                    if (jx < 0 || jx >= nx || jy < 0 || jy >= ny) continue;
                    const SweepCell& nb = grid.at(jx, jy);
                    if (nb.error.empty() && nb.final_obs.p_x >= p) strict_max = false;
                }
            }
            if (strict_max)
                maxima.push_back({ix, iy, grid.axis_x.values[ix], grid.axis_y.values[iy], p});
        }
    }
    std::stable_sort(maxima.begin(), maxima.end(), [&](const GridMaximum& a, const GridMaximum& b) {
        if (a.p_x != b.p_x) return a.p_x > b.p_x;
        return a.iy * nx + a.ix < b.iy * nx + b.ix;
    });
    return maxima;
}

namespace {

// Extend one side of an axis, continuing the local spacing. Occupation axes
// extend in sqrt(n) steps and clamp at zero.
bool extend_axis(SweepAxis& axis, bool low_side) {
    std::vector<double>& v = axis.values;
    if (v.size() < 2) return false;
    const bool increasing = v[1] > v[0];
    const int n_new = std::max(1, static_cast<int>(v.size()) / 4);
    std::vector<double> added;
    if (is_occupation_axis(axis.parameter)) {
        const double k_first = std::sqrt(v.front()), k_last = std::sqrt(v.back());
        const double k_step = std::max(1.0, std::abs(k_last - k_first) / (v.size() - 1));
        for (int i = 1; i <= n_new; ++i) {
            double k = low_side ? (increasing ? k_first - i * k_step : k_first + i * k_step)
                                : (increasing ? k_last + i * k_step : k_last - i * k_step);
            if (k < 0.0) break;
            added.push_back(std::round(k) * std::round(k));
        }
    } else {
        const double step_lo = v[1] - v[0];
        const double step_hi = v[v.size() - 1] - v[v.size() - 2];
        for (int i = 1; i <= n_new; ++i)
            added.push_back(low_side ? v.front() - i * step_lo : v.back() + i * step_hi);
    }
    // keep strict monotonicity (occupation rounding can collide near zero)
    std::vector<double> merged;
    if (low_side) {
        std::reverse(added.begin(), added.end());
        merged = added;
        merged.insert(merged.end(), v.begin(), v.end());
    } else {
        merged = v;
        merged.insert(merged.end(), added.begin(), added.end());
    }
    std::vector<double> unique;
    for (double x : merged)
        if (unique.empty() || (increasing ? x > unique.back() : x < unique.back()))
            unique.push_back(x);
    if (unique.size() <= v.size()) return false;
    v = std::move(unique);
    return true;
}

}  // namespace

SweepGrid run_sweep_autowiden(const SimConfig& base, SweepAxis ax, SweepAxis ay,
                              const SweepOptions& options, int max_rounds) {
    SweepGrid grid = run_sweep(base, ax, ay, options);
    for (int round = 0; round < max_rounds; ++round) {
        // global maximum over valid cells
        int best = -1;
        for (int i = 0; i < static_cast<int>(grid.cells.size()); ++i)
            if (grid.cells[i].error.empty() &&
                (best < 0 || grid.cells[i].final_obs.p_x > grid.cells[best].final_obs.p_x))
                best = i;
        if (best < 0) break;
        const int ix = best % grid.nx(), iy = best / grid.nx();
        SweepAxis new_ax = grid.axis_x, new_ay = grid.axis_y;
        bool grew = false;
        if (ix == 0) grew |= extend_axis(new_ax, true);
        if (ix == grid.nx() - 1) grew |= extend_axis(new_ax, false);
        if (iy == 0) grew |= extend_axis(new_ay, true);
        if (iy == grid.ny() - 1) grew |= extend_axis(new_ay, false);
        if (!grew) break;

        // reuse already-computed cells, evaluate only the new ones
        std::map<std::pair<double, double>, const SweepCell*> known;
        for (int jy = 0; jy < grid.ny(); ++jy)
            for (int jx = 0; jx < grid.nx(); ++jx)
                known[{grid.axis_x.values[jx], grid.axis_y.values[jy]}] = &grid.at(jx, jy);

        SweepGrid next;
        next.axis_x = new_ax;
        next.axis_y = new_ay;
        next.cells.resize(static_cast<size_t>(next.nx()) * next.ny());
        for (int jy = 0; jy < next.ny(); ++jy) {
            for (int jx = 0; jx < next.nx(); ++jx) {
                const auto key = std::make_pair(next.axis_x.values[jx], next.axis_y.values[jy]);
                if (auto it = known.find(key); it != known.end()) {
                    next.at(jx, jy) = *it->second;
                } else {
                    SimConfig cfg = apply_axis_value(base, new_ax.parameter, key.first);
                    cfg = apply_axis_value(cfg, new_ay.parameter, key.second);
                    next.at(jx, jy) = evaluate_cell(cfg, options);
                }
            }
        }
        grid = std::move(next);
    }
    return grid;
}

namespace {

SimConfig base_config() {
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.record_stride = 100;
    cfg.span_sigma = 3.0;
    return cfg;
}

}  // namespace

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {
        "super_fig1a",  "super_fig1b",    "dichromatic_fig2", "vacuum_fig3c",
        "vacuum_fig3d", "entangled_fig3g", "reverse_fig3h",    "coherent_fig4a",
        "coherent_fig4d", "rabi_check",
    };
    return names;
}

Preset preset(const std::string& name) {
    Preset p;
    p.name = name;
    SimConfig cfg = base_config();

    if (name == "super_fig1a" || name == "super_fig1b") {
        const int n1 = (name == "super_fig1a") ? 3947 : 24673;  // sqrt(n1) = 62.83 / 157.08
        p.description = "two red-detuned modes, large Fock occupations, (Delta2, n2) map";
        cfg.delta1 = -6.0;
        cfg.g1 = cfg.g2 = 0.1;
        cfg.field1 = FockInit{n1};
        cfg.field2 = FockInit{0};
        cfg.window1 = centered_window(n1, 20);
        cfg.window2 = centered_window(0, 20);
        p.axis_x = linspace_axis(SweepParameter::Delta2, -40.0, -2.0, 191);
        p.axis_y = squares_axis(SweepParameter::N2Init, 0, 199);
    } else if (name == "dichromatic_fig2") {
        p.description = "red-and-blue modes at Delta1 = -Delta2 = 6, (n1, n2) map";
        cfg.delta1 = 6.0;
        cfg.delta2 = -6.0;
        cfg.g1 = cfg.g2 = 0.1;
        cfg.field1 = FockInit{0};
        cfg.field2 = FockInit{0};
        cfg.window1 = centered_window(0, 20);
        cfg.window2 = centered_window(0, 20);
        p.axis_x = squares_axis(SweepParameter::N1Init, 0, 100);
        p.axis_y = squares_axis(SweepParameter::N2Init, 0, 100);
    } else if (name == "vacuum_fig3c") {
        p.description = "few-photon swing-up from |G,5,0> at the full-inversion detunings";
        cfg.delta1 = -7.56;
        cfg.delta2 = -28.56;
        cfg.g1 = cfg.g2 = 5.0;
        cfg.field1 = FockInit{5};
        cfg.field2 = FockInit{0};
        cfg.window1 = {0, 8};
        cfg.window2 = {0, 8};
    } else if (name == "vacuum_fig3d") {
        p.description = "few-photon swing-up from |G,2,0> at the full-inversion detunings";
        cfg.delta1 = -4.06;
        cfg.delta2 = -15.96;
        cfg.g1 = cfg.g2 = 5.0;
        cfg.field1 = FockInit{2};
        cfg.field2 = FockInit{0};
        cfg.window1 = {0, 5};
        cfg.window2 = {0, 5};
    } else if (name == "entangled_fig3g") {
        p.description = "dichromatic |G,1,1> excitation leaving an entangled one-photon state";
        cfg.delta1 = 3.12;
        cfg.delta2 = -3.12;
        cfg.g1 = cfg.g2 = 5.0;
        cfg.field1 = FockInit{1};
        cfg.field2 = FockInit{1};
        cfg.window1 = {0, 4};
        cfg.window2 = {0, 4};
    } else if (name == "reverse_fig3h") {
        p.description = "reverse process |X,1,0> -> |G,0,2>: one photon in, two photons out";
        cfg.delta1 = -15.68;
        cfg.delta2 = -3.78;
        cfg.g1 = cfg.g2 = 5.0;
        cfg.emitter_init = EmitterLevel::Excited;
        cfg.field1 = FockInit{1};
        cfg.field2 = FockInit{0};
        cfg.window1 = {0, 4};
        cfg.window2 = {0, 4};
    } else if (name == "coherent_fig4a") {
        p.description = "coherent-state swing-up at G = 1, moderate occupation";
        cfg.delta1 = -6.0;
        cfg.delta2 = -20.5;  // fundamental resonance for the occupations below
        cfg.g1 = cfg.g2 = 1.0;
        cfg.field1 = CoherentInit{std::sqrt(39.0)};
        cfg.field2 = CoherentInit{std::sqrt(36.0)};
        cfg.window1 = {0, 90};
        cfg.window2 = {0, 90};
        cfg.record_stride = 25;
    } else if (name == "coherent_fig4d") {
        p.description = "coherent-state swing-up in the deep quantum regime, G = 5";
        cfg.delta1 = -6.0;
        cfg.delta2 = -19.81;
        cfg.g1 = cfg.g2 = 5.0;
        cfg.field1 = CoherentInit{std::sqrt(2.0)};
        cfg.field2 = CoherentInit{1.0};
        cfg.window1 = {0, 30};
        cfg.window2 = {0, 30};
        cfg.record_stride = 25;
    } else if (name == "rabi_check") {
        p.description = "single resonant mode (G2 = 0): Rabi oscillations vs photon number";
        cfg.delta1 = 0.0;
        cfg.delta2 = 0.0;
        cfg.g1 = 0.1;
        cfg.g2 = 0.0;
        cfg.field1 = FockInit{100};
        cfg.field2 = FockInit{0};
        cfg.window1 = centered_window(100, 20);
        cfg.window2 = {0, 1};
        p.axis_x = integer_axis(SweepParameter::N1Init, 1, 348);
        p.axis_y = SweepAxis{SweepParameter::Delta2, {0.0}};
    } else {
        throw UnknownPreset("unknown preset '" + name + "'; see `preset list`");
    }
    p.config = cfg;
    return p;
}

MinimumExcitationScan minimum_excitation_scan(double delta_lo, double delta_hi, double spacing,
                                              double g, int n1, int n2,
                                              const SweepOptions& options) {
    if (!(spacing > 0.0)) throw std::invalid_argument("spacing must be positive");
    if (delta_lo > delta_hi) std::swap(delta_lo, delta_hi);
    const bool red = delta_hi <= -2.0;   // both below the emitter frequency
    const bool blue = delta_lo >= 2.0;
    if (!red && !blue)
        throw std::invalid_argument(
            "detuning grid must be strictly off-resonant: same sign with |Delta| >= 2");

    SimConfig cfg = base_config();
    cfg.g1 = cfg.g2 = g;
    cfg.field1 = FockInit{n1};
    cfg.field2 = FockInit{n2};
    const int top = std::max({n1, n2, 1}) + 2;
    cfg.window1 = {0, top};
    cfg.window2 = {0, top};

    const int count = static_cast<int>(std::floor((delta_hi - delta_lo) / spacing + 1e-9)) + 1;
    const SweepAxis ax = linspace_axis(SweepParameter::Delta1, delta_lo,
                                       delta_lo + spacing * (count - 1), count);
    const SweepAxis ay = linspace_axis(SweepParameter::Delta2, delta_lo,
                                       delta_lo + spacing * (count - 1), count);
    const SweepGrid grid = run_sweep(cfg, ax, ay, options);

    MinimumExcitationScan result;
    for (int iy = 0; iy < grid.ny(); ++iy) {
        for (int ix = 0; ix < grid.nx(); ++ix) {
            const SweepCell& cell = grid.at(ix, iy);
            if (!cell.error.empty()) continue;
            if (cell.final_obs.p_x > result.max_p_x) {
                result.max_p_x = cell.final_obs.p_x;
                result.delta1_at_max = grid.axis_x.values[ix];
                result.delta2_at_max = grid.axis_y.values[iy];
            }
        }
    }
    return result;
}

}  // namespace swingup
