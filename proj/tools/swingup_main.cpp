// Command-line front end: evolve / sweep / oracle / audit / preset.
// Exit codes: 0 success, 1 validation or usage error, 2 convergence-audit
// failure, 3 I/O error.

#include <chrono>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "swingup/config_io.hpp"

namespace {

using namespace swingup;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitAudit = 2;
constexpr int kExitIo = 3;

RunManifest make_manifest(const std::string& kind, const JobSpec& job) {
    RunManifest m;
    m.kind = kind;
    m.config_echo = write_config_text(job);
    m.steps = step_count(job.config);
    m.dt_effective = 2.0 * job.config.span_sigma / step_count(job.config);
    m.window1 = job.config.window1;
    m.window2 = job.config.window2;
    return m;
}

int run_evolve(const std::string& config_path, std::string out_path, std::string manifest_path) {
    const JobSpec job = parse_config_file(config_path);
    if (job.is_sweep()) {
        std::cerr << "evolve: config specifies a sweep; use the sweep subcommand\n";
        return kExitValidation;
    }
    if (out_path.empty()) out_path = job.output.empty() ? "trajectory.csv" : job.output;
    if (manifest_path.empty()) manifest_path = out_path + ".manifest.json";

    const auto t0 = std::chrono::steady_clock::now();
    const Trajectory traj = evolve(job.config);
    const AuditResult audit = convergence_audit(traj, job.audit);

    RunManifest m = make_manifest("evolve", job);
    m.audit_pass = audit.pass;
    m.audit_summary = audit.summary();
    m.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    m.artifacts = {out_path};
    write_trajectory(traj, job.config, out_path);
    write_manifest(m, manifest_path);

    const ObservableSet& fin = traj.observables.back();
    std::printf("final: p_x = %.6f, n1 = %.6f, n2 = %.6f, delta_n1 = %+.6f, delta_n2 = %+.6f\n",
                fin.p_x, fin.n1_mean, fin.n2_mean, fin.n1_mean - traj.observables.front().n1_mean,
                fin.n2_mean - traj.observables.front().n2_mean);
    std::printf("audit: %s\n", audit.summary().c_str());
    std::printf("wrote %s and %s\n", out_path.c_str(), manifest_path.c_str());
    return audit.pass ? kExitOk : kExitAudit;
}

int run_sweep_cmd(const std::string& config_path, std::string out_path, std::string manifest_path,
                  int threads_override, int autowiden) {
    JobSpec job = parse_config_file(config_path);
    if (!job.is_sweep()) {
        std::cerr << "sweep: config has no sweep axes (set sweep_x/sweep_x_values or a sweep preset)\n";
        return kExitValidation;
    }
    if (out_path.empty()) out_path = job.output.empty() ? "grid.csv" : job.output;
    if (manifest_path.empty()) manifest_path = out_path + ".run.json";
    if (threads_override > 0) job.threads = threads_override;

    SweepOptions options;
    options.threads = job.threads;
    options.audit = job.audit;

    // presets ask for automatic widening when the peak lands on a grid edge
    const bool widen = autowiden == 1 || (autowiden < 0 && job.preset_name.has_value());

    const auto t0 = std::chrono::steady_clock::now();
    const SweepGrid grid = widen
                               ? run_sweep_autowiden(job.config, *job.axis_x, *job.axis_y, options)
                               : run_sweep(job.config, *job.axis_x, *job.axis_y, options);

    int flagged = 0;
    for (const auto& cell : grid.cells)
        if (!cell.audit_pass || !cell.error.empty()) ++flagged;

    RunManifest m = make_manifest("sweep", job);
    m.audit_pass = flagged == 0;
    m.audit_summary = std::to_string(flagged) + " of " + std::to_string(grid.cells.size()) +
                      " cells flagged";
    m.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    m.artifacts = {out_path, out_path + ".manifest.json"};
    write_grid(grid, out_path, write_config_text(job));
    write_manifest(m, manifest_path);

    const auto maxima = locate_maxima(grid, 0.5);
    if (!maxima.empty()) {
        std::printf("located %zu maxima above p_x = 0.5; best: p_x = %.4f at x = %g, y = %g\n",
                    maxima.size(), maxima[0].p_x, maxima[0].x, maxima[0].y);
    }
    std::printf("%s\n", m.audit_summary.c_str());
    std::printf("wrote %s and %s\n", out_path.c_str(), manifest_path.c_str());
    return kExitOk;
}

int run_oracle(const std::string& config_path, int substeps) {
    const JobSpec job = parse_config_file(config_path);
    if (job.is_sweep()) {
        std::cerr << "oracle: config specifies a sweep; point configurations only\n";
        return kExitValidation;
    }
    const Trajectory traj = evolve(job.config);
    const StateVector reference = oracle_propagate(job.config, substeps);
    const double fid = fidelity(traj.final_state, reference);
    std::printf("rk4 vs matrix-exponential reference (%d substeps/dt): fidelity = %.15f (1 - %.3e)\n",
                substeps, fid, 1.0 - fid);
    return kExitOk;
}

int run_audit(const std::string& config_path, bool halving) {
    const JobSpec job = parse_config_file(config_path);
    if (job.is_sweep()) {
        std::cerr << "audit: config specifies a sweep; point configurations only\n";
        return kExitValidation;
    }
    EvolveOptions opts;
    opts.step_halving_check = halving;
    const Trajectory traj = evolve(job.config, opts);
    const AuditResult audit = convergence_audit(traj, job.audit);
    std::printf("audit: %s\n", audit.summary().c_str());
    std::printf("edge occupancy maxima: mode1 [%.3e, %.3e], mode2 [%.3e, %.3e]\n",
                traj.audit.max_edge_occupancy[0], traj.audit.max_edge_occupancy[1],
                traj.audit.max_edge_occupancy[2], traj.audit.max_edge_occupancy[3]);
    if (traj.audit.step_halving_fidelity)
        std::printf("step-halving self-check: fidelity(dt, dt/2) = %.15f\n",
                    *traj.audit.step_halving_fidelity);
    return audit.pass ? kExitOk : kExitAudit;
}

int run_preset_list() {
    for (const auto& name : preset_names()) {
        const Preset p = preset(name);
        std::printf("%-18s %s%s\n", p.name.c_str(), p.description.c_str(),
                    p.axis_x ? " [sweep]" : "");
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-level emitter coupled to two pulsed quantized field modes"};
    app.require_subcommand(1);

    std::string config_path, out_path, manifest_path;
    int threads = 0;
    int substeps = 8;
    bool halving = false;
    int autowiden = -1;  // -1 = preset default

    auto* evolve_cmd = app.add_subcommand("evolve", "integrate one configuration, write the trajectory CSV");
    evolve_cmd->add_option("config", config_path, "config file")->required();
    evolve_cmd->add_option("-o,--output", out_path, "trajectory CSV path");
    evolve_cmd->add_option("-m,--manifest", manifest_path, "run manifest path");

    auto* sweep_cmd = app.add_subcommand("sweep", "run a 2D parameter sweep, write the grid CSV");
    sweep_cmd->add_option("config", config_path, "config file")->required();
    sweep_cmd->add_option("-o,--output", out_path, "grid CSV path");
    sweep_cmd->add_option("-m,--manifest", manifest_path, "run manifest path");
    sweep_cmd->add_option("-t,--threads", threads, "worker threads");
    sweep_cmd->add_flag("--autowiden{1},--no-autowiden{0}", autowiden,
                        "extend axes when the maximum sits on a grid edge");

    auto* oracle_cmd = app.add_subcommand("oracle", "compare RK4 against the matrix-exponential reference");
    oracle_cmd->add_option("config", config_path, "config file")->required();
    oracle_cmd->add_option("--substeps", substeps, "reference substeps per dt")
        ->check(CLI::PositiveNumber);

    auto* audit_cmd = app.add_subcommand("audit", "report window-convergence health for one run");
    audit_cmd->add_option("config", config_path, "config file")->required();
    audit_cmd->add_flag("--step-halving", halving, "also rerun at dt/2 and report the fidelity");

    auto* preset_cmd = app.add_subcommand("preset", "preset utilities");
    auto* preset_list_cmd = preset_cmd->add_subcommand("list", "list available presets");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*evolve_cmd) return run_evolve(config_path, out_path, manifest_path);
        if (*sweep_cmd) return run_sweep_cmd(config_path, out_path, manifest_path, threads, autowiden);
        if (*oracle_cmd) return run_oracle(config_path, substeps);
        if (*audit_cmd) return run_audit(config_path, halving);
        if (*preset_list_cmd) return run_preset_list();
        if (*preset_cmd) {
            std::cerr << "preset: expected a subcommand (list)\n";
            return kExitValidation;
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const WindowTooSmall& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const UnknownPreset& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::runtime_error& e) {
        // file writers throw runtime_error on stream failure
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}
