#pragma once

#include <optional>
#include <string>
#include <vector>

#include "swingup/scenarios.hpp"

namespace swingup {

// A fully resolved job: a single evolution, or a sweep when axes are set.
struct JobSpec {
    SimConfig config;
    std::optional<SweepAxis> axis_x, axis_y;
    AuditTolerances audit;
    int threads = 1;
    std::string output;  // empty = subcommand default
    std::optional<std::string> preset_name;

    bool is_sweep() const { return axis_x.has_value() && axis_y.has_value(); }
};

// Flat key = value configuration file. A `preset = <name>` line expands to
// the pinned configuration first; later keys override it. Unknown keys are
// rejected (ParseError with line diagnostics); invariant violations are
// collected into one ValidationError.
JobSpec parse_config_file(const std::string& path);
JobSpec parse_config_text(const std::string& text, const std::string& origin);

// Explicit echo of a resolved job; parsing it again yields the same job.
std::string write_config_text(const JobSpec& job);

// CSV time series: header tau,p_x,n1,n2,delta_n1,delta_n2,excitation,
// norm_drift, one row per recorded sample, 17 significant digits, with the
// configuration echoed on leading `#` lines.
void write_trajectory(const Trajectory& traj, const SimConfig& cfg, const std::string& path);

// Long-format CSV x_value,y_value,p_x,delta_n1,delta_n2,audit_pass in
// row-major order (axis_x fastest) plus a companion <path>.manifest.json
// describing the axes and any flagged cells.
void write_grid(const SweepGrid& grid, const std::string& path,
                const std::string& config_echo = {});

struct RunManifest {
    std::string kind;  // evolve | sweep | oracle | audit
    std::string config_echo;
    int steps = 0;
    double dt_effective = 0.0;
    TruncationWindow window1, window2;
    bool audit_pass = true;
    std::string audit_summary;
    double duration_seconds = 0.0;
    std::vector<std::string> artifacts;
};

std::string manifest_to_json(const RunManifest& manifest);
void write_manifest(const RunManifest& manifest, const std::string& path);

// 17-significant-digit scientific notation used in every CSV number.
std::string format_full(double v);

}  // namespace swingup
