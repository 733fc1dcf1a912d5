#include "swingup/config_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace swingup {

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return buf;
}

namespace {

struct RawEntry {
    int line = 0;
    std::string value;
    bool used = false;
};

using RawMap = std::map<std::string, RawEntry>;

const std::vector<std::string> kKnownKeys = {
    "preset",       "delta1",        "delta2",        "g1",
    "g2",           "emitter_init",  "n1_init",       "n2_init",
    "alpha1_sq",    "alpha2_sq",     "alpha1_phase",  "alpha2_phase",
    "coherent_tol", "window1",       "window2",       "window_halfwidth",
    "dt",           "record_stride", "span_sigma",    "sweep_x",
    "sweep_x_values", "sweep_y",     "sweep_y_values", "threads",
    "audit_tol_norm", "audit_tol_excitation", "audit_tol_boundary", "output",
};

[[noreturn]] void parse_fail(const std::string& origin, int line, const std::string& msg) {
    std::ostringstream os;
    os << origin << ":" << line << ": " << msg;
    throw ParseError(os.str());
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                          (s.front() == '\'' && s.back() == '\'')))
        return s.substr(1, s.size() - 2);
    return s;
}

RawMap tokenize(const std::string& text, const std::string& origin) {
    RawMap raw;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (size_t hash = line.find('#'); hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            parse_fail(origin, lineno, "expected `key = value`, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = unquote(trim(line.substr(eq + 1)));
        if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end())
            parse_fail(origin, lineno, "unknown key '" + key + "'");
        if (value.empty()) parse_fail(origin, lineno, "key '" + key + "' has no value");
        if (raw.count(key)) parse_fail(origin, lineno, "duplicate key '" + key + "'");
        raw[key] = RawEntry{lineno, value};
    }
    return raw;
}

double parse_double(const RawMap& raw, const std::string& key, const std::string& origin,
                    const RawEntry& e) {
    (void)raw;
    try {
        size_t pos = 0;
        const double v = std::stod(e.value, &pos);
        if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        parse_fail(origin, e.line, "key '" + key + "': '" + e.value + "' is not a number");
    }
}

int parse_int(const std::string& key, const std::string& origin, const RawEntry& e) {
    try {
        size_t pos = 0;
        const long v = std::stol(e.value, &pos);
        if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
        return static_cast<int>(v);
    } catch (const std::exception&) {
        parse_fail(origin, e.line, "key '" + key + "': '" + e.value + "' is not an integer");
    }
}

// [a..b]
TruncationWindow parse_window(const std::string& key, const std::string& origin,
                              const RawEntry& e) {
    const std::string& v = e.value;
    const size_t dots = v.find("..");
    if (v.size() < 5 || v.front() != '[' || v.back() != ']' || dots == std::string::npos)
        parse_fail(origin, e.line, "key '" + key + "': expected a window like [0..24]");
    try {
        const int lo = std::stoi(trim(v.substr(1, dots - 1)));
        const int hi = std::stoi(trim(v.substr(dots + 2, v.size() - dots - 3)));
        return {lo, hi};
    } catch (const std::exception&) {
        parse_fail(origin, e.line, "key '" + key + "': expected a window like [0..24]");
    }
}

// linspace:lo:hi:count | range:lo:hi:step | squares:klo:khi[:kstep] |
// ints:lo:hi[:step] | comma-separated list
std::vector<double> parse_axis_values(SweepParameter p, const std::string& key,
                                      const std::string& origin, const RawEntry& e) {
    const std::string& v = e.value;
    auto split = [](const std::string& s, char sep) {
        std::vector<std::string> parts;
        std::istringstream in(s);
        std::string part;
        while (std::getline(in, part, sep)) parts.push_back(trim(part));
        return parts;
    };
    try {
        if (v.rfind("linspace:", 0) == 0) {
            const auto f = split(v.substr(9), ':');
            if (f.size() != 3) throw std::invalid_argument("linspace needs lo:hi:count");
            return linspace_axis(p, std::stod(f[0]), std::stod(f[1]), std::stoi(f[2])).values;
        }
        if (v.rfind("range:", 0) == 0) {
            const auto f = split(v.substr(6), ':');
            if (f.size() != 3) throw std::invalid_argument("range needs lo:hi:step");
            const double lo = std::stod(f[0]), hi = std::stod(f[1]), step = std::stod(f[2]);
            if (!(step > 0.0) || hi < lo) throw std::invalid_argument("bad range");
            const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
            return linspace_axis(p, lo, lo + step * (count - 1), count).values;
        }
        if (v.rfind("squares:", 0) == 0) {
            const auto f = split(v.substr(8), ':');
            if (f.size() != 2 && f.size() != 3) throw std::invalid_argument("squares needs klo:khi[:kstep]");
            return squares_axis(p, std::stoi(f[0]), std::stoi(f[1]),
                                f.size() == 3 ? std::stoi(f[2]) : 1)
                .values;
        }
        if (v.rfind("ints:", 0) == 0) {
            const auto f = split(v.substr(5), ':');
            if (f.size() != 2 && f.size() != 3) throw std::invalid_argument("ints needs lo:hi[:step]");
            return integer_axis(p, std::stoi(f[0]), std::stoi(f[1]),
                                f.size() == 3 ? std::stoi(f[2]) : 1)
                .values;
        }
        std::vector<double> values;
        for (const auto& part : split(v, ',')) {
            if (part.empty()) throw std::invalid_argument("empty element");
            values.push_back(std::stod(part));
        }
        if (values.empty()) throw std::invalid_argument("no values");
        return values;
    } catch (const std::exception& ex) {
        parse_fail(origin, e.line,
                   "key '" + key + "': cannot parse axis values '" + v + "' (" + ex.what() + ")");
    }
}

}  // namespace

JobSpec parse_config_text(const std::string& text, const std::string& origin) {
    RawMap raw = tokenize(text, origin);
    auto take = [&](const std::string& key) -> RawEntry* {
        auto it = raw.find(key);
        if (it == raw.end()) return nullptr;
        it->second.used = true;
        return &it->second;
    };

    JobSpec job;
    bool window1_explicit = false, window2_explicit = false;
    bool field1_overridden = false, field2_overridden = false;

    if (RawEntry* e = take("preset")) {
        try {
            const Preset p = preset(e->value);
            job.config = p.config;
            job.axis_x = p.axis_x;
            job.axis_y = p.axis_y;
            job.preset_name = e->value;
        } catch (const UnknownPreset& ex) {
            parse_fail(origin, e->line, ex.what());
        }
    }

    SimConfig& cfg = job.config;
    if (RawEntry* e = take("delta1")) cfg.delta1 = parse_double(raw, "delta1", origin, *e);
    if (RawEntry* e = take("delta2")) cfg.delta2 = parse_double(raw, "delta2", origin, *e);
    if (RawEntry* e = take("g1")) cfg.g1 = parse_double(raw, "g1", origin, *e);
    if (RawEntry* e = take("g2")) cfg.g2 = parse_double(raw, "g2", origin, *e);
    if (RawEntry* e = take("dt")) cfg.dt = parse_double(raw, "dt", origin, *e);
    if (RawEntry* e = take("record_stride")) cfg.record_stride = parse_int("record_stride", origin, *e);
    if (RawEntry* e = take("span_sigma")) cfg.span_sigma = parse_double(raw, "span_sigma", origin, *e);

    if (RawEntry* e = take("emitter_init")) {
        if (e->value == "ground") cfg.emitter_init = EmitterLevel::Ground;
        else if (e->value == "excited") cfg.emitter_init = EmitterLevel::Excited;
        else parse_fail(origin, e->line, "emitter_init must be 'ground' or 'excited'");
    }

    double coherent_tol = 1e-12;
    if (RawEntry* e = take("coherent_tol")) coherent_tol = parse_double(raw, "coherent_tol", origin, *e);

    auto resolve_field = [&](const char* fock_key, const char* alpha_key, const char* phase_key,
                             FieldInit& field, bool& overridden) {
        RawEntry* fock = take(fock_key);
        RawEntry* alpha = take(alpha_key);
        RawEntry* phase = take(phase_key);
        if (fock && alpha)
            parse_fail(origin, alpha->line,
                       std::string(fock_key) + " and " + alpha_key + " are mutually exclusive");
        if (fock) {
            field = FockInit{parse_int(fock_key, origin, *fock)};
            overridden = true;
        } else if (alpha) {
            const double sq = parse_double(raw, alpha_key, origin, *alpha);
            if (sq < 0.0) parse_fail(origin, alpha->line, std::string(alpha_key) + " must be >= 0");
            const double ph = phase ? parse_double(raw, phase_key, origin, *phase) : 0.0;
            field = CoherentInit{std::polar(std::sqrt(sq), ph), coherent_tol};
            overridden = true;
        } else if (phase) {
            parse_fail(origin, phase->line,
                       std::string(phase_key) + " requires " + alpha_key);
        }
    };
    resolve_field("n1_init", "alpha1_sq", "alpha1_phase", cfg.field1, field1_overridden);
    resolve_field("n2_init", "alpha2_sq", "alpha2_phase", cfg.field2, field2_overridden);

    int halfwidth = 20;
    if (RawEntry* e = take("window_halfwidth")) {
        halfwidth = parse_int("window_halfwidth", origin, *e);
        // force auto re-windowing around the (possibly preset) occupations
        field1_overridden = field2_overridden = true;
    }
    if (RawEntry* e = take("window1")) {
        cfg.window1 = parse_window("window1", origin, *e);
        window1_explicit = true;
    }
    if (RawEntry* e = take("window2")) {
        cfg.window2 = parse_window("window2", origin, *e);
        window2_explicit = true;
    }
    auto auto_window = [&](const FieldInit& f) {
        if (is_fock(f))
            return centered_window(static_cast<int>(std::lround(mean_occupation(f))), halfwidth);
        const double mean = mean_occupation(f);
        return TruncationWindow{0, static_cast<int>(std::ceil(mean + 10.0 * std::sqrt(std::max(mean, 1.0))))};
    };
    if (!window1_explicit && (field1_overridden || !job.preset_name)) cfg.window1 = auto_window(cfg.field1);
    if (!window2_explicit && (field2_overridden || !job.preset_name)) cfg.window2 = auto_window(cfg.field2);

    // sweep axes: file keys replace any preset axes
    RawEntry* sx = take("sweep_x");
    RawEntry* sxv = take("sweep_x_values");
    RawEntry* sy = take("sweep_y");
    RawEntry* syv = take("sweep_y_values");
    if (!!sx != !!sxv)
        parse_fail(origin, (sx ? sx : sxv)->line, "sweep_x and sweep_x_values go together");
    if (!!sy != !!syv)
        parse_fail(origin, (sy ? sy : syv)->line, "sweep_y and sweep_y_values go together");
    if (sx) {
        const SweepParameter p = sweep_parameter_from_string(sx->value);
        job.axis_x = SweepAxis{p, parse_axis_values(p, "sweep_x_values", origin, *sxv)};
    }
    if (sy) {
        const SweepParameter p = sweep_parameter_from_string(sy->value);
        job.axis_y = SweepAxis{p, parse_axis_values(p, "sweep_y_values", origin, *syv)};
    }
    if (job.axis_x && !job.axis_y)
        job.axis_y = SweepAxis{SweepParameter::Delta2, {cfg.delta2}};

    if (RawEntry* e = take("threads")) job.threads = std::max(1, parse_int("threads", origin, *e));
    if (RawEntry* e = take("audit_tol_norm")) job.audit.norm = parse_double(raw, "audit_tol_norm", origin, *e);
    if (RawEntry* e = take("audit_tol_excitation"))
        job.audit.excitation = parse_double(raw, "audit_tol_excitation", origin, *e);
    if (RawEntry* e = take("audit_tol_boundary"))
        job.audit.boundary = parse_double(raw, "audit_tol_boundary", origin, *e);
    if (RawEntry* e = take("output")) job.output = e->value;

    validate(cfg);  // throws ValidationError listing all violations
    return job;
}

JobSpec parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open config file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), path);
}

std::string write_config_text(const JobSpec& job) {
    const SimConfig& cfg = job.config;
    std::ostringstream os;
    if (job.preset_name) os << "# expanded from preset: " << *job.preset_name << "\n";
    os << "delta1 = " << format_full(cfg.delta1) << "\n";
    os << "delta2 = " << format_full(cfg.delta2) << "\n";
    os << "g1 = " << format_full(cfg.g1) << "\n";
    os << "g2 = " << format_full(cfg.g2) << "\n";
    os << "emitter_init = " << (cfg.emitter_init == EmitterLevel::Ground ? "ground" : "excited")
       << "\n";
    auto field = [&](const char* fock_key, const char* alpha_key, const char* phase_key,
                     const FieldInit& f) {
        if (const auto* fock = std::get_if<FockInit>(&f)) {
            os << fock_key << " = " << fock->n << "\n";
        } else {
            const auto& c = std::get<CoherentInit>(f);
            os << alpha_key << " = " << format_full(std::norm(c.alpha)) << "\n";
            if (std::arg(c.alpha) != 0.0)
                os << phase_key << " = " << format_full(std::arg(c.alpha)) << "\n";
        }
    };
    field("n1_init", "alpha1_sq", "alpha1_phase", cfg.field1);
    field("n2_init", "alpha2_sq", "alpha2_phase", cfg.field2);
    if (const auto* c = std::get_if<CoherentInit>(&cfg.field1))
        os << "coherent_tol = " << format_full(c->trunc_tol) << "\n";
    else if (const auto* c2 = std::get_if<CoherentInit>(&cfg.field2))
        os << "coherent_tol = " << format_full(c2->trunc_tol) << "\n";
    os << "window1 = [" << cfg.window1.n_min << ".." << cfg.window1.n_max << "]\n";
    os << "window2 = [" << cfg.window2.n_min << ".." << cfg.window2.n_max << "]\n";
    os << "dt = " << format_full(cfg.dt) << "\n";
    os << "record_stride = " << cfg.record_stride << "\n";
    os << "span_sigma = " << format_full(cfg.span_sigma) << "\n";
    auto axis = [&](const char* key, const char* values_key, const SweepAxis& a) {
        os << key << " = " << to_string(a.parameter) << "\n";
        os << values_key << " = ";
        for (size_t i = 0; i < a.values.size(); ++i)
            os << (i ? "," : "") << format_full(a.values[i]);
        os << "\n";
    };
    if (job.axis_x) axis("sweep_x", "sweep_x_values", *job.axis_x);
    if (job.axis_y && job.axis_x) axis("sweep_y", "sweep_y_values", *job.axis_y);
    os << "threads = " << job.threads << "\n";
    os << "audit_tol_norm = " << format_full(job.audit.norm) << "\n";
    os << "audit_tol_excitation = " << format_full(job.audit.excitation) << "\n";
    os << "audit_tol_boundary = " << format_full(job.audit.boundary) << "\n";
    if (!job.output.empty()) os << "output = " << job.output << "\n";
    return os.str();
}

namespace {

void open_for_write(std::ofstream& out, const std::string& path) {
    out.open(path, std::ios::binary);  // binary: byte-identical output everywhere
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
}

void echo_as_comments(std::ostream& out, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) out << "# " << line << "\n";
}

}  // namespace

void write_trajectory(const Trajectory& traj, const SimConfig& cfg, const std::string& path) {
    std::ofstream out;
    open_for_write(out, path);
    JobSpec echo_job;
    echo_job.config = cfg;
    echo_as_comments(out, write_config_text(echo_job));
    out << "# samples = " << traj.times.size()
        << ", max_norm_drift_per_step = " << format_full(traj.audit.max_norm_drift_per_step)
        << ", max_excitation_drift = " << format_full(traj.audit.max_excitation_drift)
        << ", max_boundary_occupancy = " << format_full(traj.audit.max_boundary_occupancy)
        << "\n";
    out << "tau,p_x,n1,n2,delta_n1,delta_n2,excitation,norm_drift\n";
    const double n1_0 = traj.observables.front().n1_mean;
    const double n2_0 = traj.observables.front().n2_mean;
    for (size_t i = 0; i < traj.times.size(); ++i) {
        const ObservableSet& o = traj.observables[i];
        out << format_full(traj.times[i]) << ',' << format_full(o.p_x) << ','
            << format_full(o.n1_mean) << ',' << format_full(o.n2_mean) << ','
            << format_full(o.n1_mean - n1_0) << ',' << format_full(o.n2_mean - n2_0) << ','
            << format_full(o.excitation) << ',' << format_full(o.norm_drift) << "\n";
    }
    if (!out) throw std::runtime_error(path + ": write failed");
}

void write_grid(const SweepGrid& grid, const std::string& path, const std::string& config_echo) {
    std::ofstream out;
    open_for_write(out, path);
    out << "# sweep over x = " << to_string(grid.axis_x.parameter) << " (" << grid.nx()
        << " values), y = " << to_string(grid.axis_y.parameter) << " (" << grid.ny()
        << " values)\n";
    if (!config_echo.empty()) echo_as_comments(out, config_echo);
    out << "x_value,y_value,p_x,delta_n1,delta_n2,audit_pass\n";
    for (int iy = 0; iy < grid.ny(); ++iy) {
        for (int ix = 0; ix < grid.nx(); ++ix) {
            const SweepCell& cell = grid.at(ix, iy);
            out << format_full(grid.axis_x.values[ix]) << ','
                << format_full(grid.axis_y.values[iy]) << ',' << format_full(cell.final_obs.p_x)
                << ',' << format_full(cell.delta_n1) << ',' << format_full(cell.delta_n2) << ','
                << (cell.audit_pass ? 1 : 0) << "\n";
        }
    }
    if (!out) throw std::runtime_error(path + ": write failed");

    nlohmann::json j;
    j["axis_x"] = {{"parameter", to_string(grid.axis_x.parameter)},
                   {"values", grid.axis_x.values}};
    j["axis_y"] = {{"parameter", to_string(grid.axis_y.parameter)},
                   {"values", grid.axis_y.values}};
    j["shape"] = {grid.nx(), grid.ny()};
    nlohmann::json flagged = nlohmann::json::array();
    for (int iy = 0; iy < grid.ny(); ++iy)
        for (int ix = 0; ix < grid.nx(); ++ix) {
            const SweepCell& cell = grid.at(ix, iy);
            if (cell.audit_pass && cell.error.empty()) continue;
            nlohmann::json f = {{"ix", ix}, {"iy", iy}, {"rerun_widened", cell.rerun_widened}};
            if (!cell.error.empty()) f["error"] = cell.error;
            flagged.push_back(f);
        }
    j["flagged_cells"] = flagged;
    if (!config_echo.empty()) j["config"] = config_echo;
    std::ofstream mout;
    open_for_write(mout, path + ".manifest.json");
    mout << j.dump(2) << "\n";
    if (!mout) throw std::runtime_error(path + ".manifest.json: write failed");
}

std::string manifest_to_json(const RunManifest& m) {
    nlohmann::json j;
    j["kind"] = m.kind;
    j["config"] = m.config_echo;
    j["integrator"] = {{"method", "rk4"},
                       {"steps", m.steps},
                       {"dt_effective", m.dt_effective},
                       {"renormalize_each_step", true}};
    j["windows"] = {{"mode1", {m.window1.n_min, m.window1.n_max}},
                    {"mode2", {m.window2.n_min, m.window2.n_max}}};
    j["audit"] = {{"pass", m.audit_pass}, {"summary", m.audit_summary}};
    j["duration_seconds"] = m.duration_seconds;
    j["artifacts"] = m.artifacts;
    return j.dump(2) + "\n";
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
    std::ofstream out;
    open_for_write(out, path);
    out << manifest_to_json(manifest);
    if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace swingup
