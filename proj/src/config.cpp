#include "pointwave/config.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "pointwave/errors.hpp"

namespace pointwave {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw ValidationError("config key '" + key + "': not a number: '" + v + "'");
    return x;
}

long parse_int(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const long x = std::strtol(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw ValidationError("config key '" + key + "': not an integer: '" + v + "'");
    return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ValidationError("config key '" + key + "': not a boolean: '" + v + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::istringstream is(v);
    std::vector<double> out;
    std::string tok;
    while (is >> tok) out.push_back(parse_double(key, tok));
    if (out.empty()) throw ValidationError("config key '" + key + "': empty list");
    return out;
}

Vec3 parse_vec3(const std::string& key, const std::string& v) {
    auto list = parse_list(key, v);
    if (list.size() != 3)
        throw ValidationError("config key '" + key + "': expected 3 numbers");
    return {list[0], list[1], list[2]};
}

std::string vec3_str(const Vec3& v) {
    return format_double(v.x) + " " + format_double(v.y) + " " + format_double(v.z);
}

std::string list_str(const std::vector<double>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ' ';
        s += format_double(v[i]);
    }
    return s;
}

std::string env_name(const std::string& key) {
    std::string s = "POINTWAVE_";
    for (char c : key) s += c == '.' ? '_' : char(std::toupper(c));
    return s;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

// the full schema: key -> typed setter
const std::map<std::string, Setter>& schema() {
    static const std::map<std::string, Setter> table = {
        {"domain.shape", [](auto& c, auto& k, auto& v) { (void)k; c.domain.shape = shape_from_string(v); }},
        {"domain.radius", [](auto& c, auto& k, auto& v) { c.domain.radius = parse_double(k, v); }},
        {"domain.half_widths", [](auto& c, auto& k, auto& v) { c.domain.half_widths = parse_vec3(k, v); }},
        {"domain.semi_axes", [](auto& c, auto& k, auto& v) { c.domain.semi_axes = parse_vec3(k, v); }},
        {"domain.center", [](auto& c, auto& k, auto& v) { c.domain.center = parse_vec3(k, v); }},

        {"data.phi.amplitude", [](auto& c, auto& k, auto& v) { c.phi.amplitude = parse_double(k, v); }},
        {"data.phi.center", [](auto& c, auto& k, auto& v) { c.phi.center = parse_vec3(k, v); }},
        {"data.phi.radius", [](auto& c, auto& k, auto& v) { c.phi.radius = parse_double(k, v); }},
        {"data.phi.smoothness", [](auto& c, auto& k, auto& v) { c.phi.smoothness = int(parse_int(k, v)); }},
        {"data.psi.amplitude", [](auto& c, auto& k, auto& v) { c.psi.amplitude = parse_double(k, v); }},
        {"data.psi.center", [](auto& c, auto& k, auto& v) { c.psi.center = parse_vec3(k, v); }},
        {"data.psi.radius", [](auto& c, auto& k, auto& v) { c.psi.radius = parse_double(k, v); }},
        {"data.psi.smoothness", [](auto& c, auto& k, auto& v) { c.psi.smoothness = int(parse_int(k, v)); }},
        {"data.source.amplitude", [](auto& c, auto& k, auto& v) { c.source.amplitude = parse_double(k, v); }},
        {"data.source.center", [](auto& c, auto& k, auto& v) { c.source.center = parse_vec3(k, v); }},
        {"data.source.radius", [](auto& c, auto& k, auto& v) { c.source.radius = parse_double(k, v); }},
        {"data.source.smoothness", [](auto& c, auto& k, auto& v) { c.source.smoothness = int(parse_int(k, v)); }},
        {"data.source.time_center", [](auto& c, auto& k, auto& v) { c.source.time_center = parse_double(k, v); }},
        {"data.source.time_width", [](auto& c, auto& k, auto& v) { c.source.time_width = parse_double(k, v); }},
        {"data.source.time_smoothness", [](auto& c, auto& k, auto& v) { c.source.time_smoothness = int(parse_int(k, v)); }},

        {"spectral.resolution", [](auto& c, auto& k, auto& v) { c.spectral.resolution = int(parse_int(k, v)); }},
        {"spectral.modes", [](auto& c, auto& k, auto& v) { c.spectral.modes = int(parse_int(k, v)); }},
        {"spectral.captured_mass_deficit", [](auto& c, auto& k, auto& v) { c.spectral.captured_mass_deficit = parse_double(k, v); }},
        {"spectral.max_modes", [](auto& c, auto& k, auto& v) { c.spectral.max_modes = int(parse_int(k, v)); }},
        {"spectral.solver", [](auto& c, auto& k, auto& v) {
             if (v == "lanczos") c.spectral.solver = EigensolveOptions::Solver::lanczos;
             else if (v == "dense") c.spectral.solver = EigensolveOptions::Solver::dense;
             else throw ValidationError("config key '" + k + "': expected lanczos|dense");
         }},
        {"spectral.matvec", [](auto& c, auto& k, auto& v) {
             if (v == "auto") c.spectral.matvec = MatvecPath::automatic;
             else if (v == "direct") c.spectral.matvec = MatvecPath::direct;
             else if (v == "fft") c.spectral.matvec = MatvecPath::fft;
             else throw ValidationError("config key '" + k + "': expected auto|direct|fft");
         }},

        {"time.horizon", [](auto& c, auto& k, auto& v) { c.time.horizon = parse_double(k, v); }},
        {"time.step", [](auto& c, auto& k, auto& v) { c.time.step = parse_double(k, v); }},
        {"time.eps_power", [](auto& c, auto& k, auto& v) { c.time.eps_power = parse_bool(k, v); }},
        {"time.tau", [](auto& c, auto& k, auto& v) { c.time.tau = parse_double(k, v); }},

        {"fdtd.eps", [](auto& c, auto& k, auto& v) { c.fdtd.eps = parse_list(k, v); }},
        {"fdtd.n_min", [](auto& c, auto& k, auto& v) { c.fdtd.n_min = int(parse_int(k, v)); }},
        {"fdtd.cfl", [](auto& c, auto& k, auto& v) { c.fdtd.cfl = parse_double(k, v); }},
        {"fdtd.boundary", [](auto& c, auto& k, auto& v) {
             if (v == "causal") c.fdtd.boundary = BoundaryMode::causal_box;
             else if (v == "sponge") c.fdtd.boundary = BoundaryMode::sponge;
             else throw ValidationError("config key '" + k + "': expected causal|sponge");
         }},
        {"fdtd.sponge_cells", [](auto& c, auto& k, auto& v) { c.fdtd.sponge_cells = int(parse_int(k, v)); }},
        {"fdtd.blend", [](auto& c, auto& k, auto& v) { c.fdtd.blend = parse_bool(k, v); }},
        {"fdtd.grid_mode", [](auto& c, auto& k, auto& v) {
             if (v == "common") c.fdtd.common_grid = true;
             else if (v == "per_eps") c.fdtd.common_grid = false;
             else throw ValidationError("config key '" + k + "': expected common|per_eps");
         }},
        {"fdtd.box_half_width", [](auto& c, auto& k, auto& v) { c.fdtd.box_half_width = parse_double(k, v); }},
        {"fdtd.memory_budget_gb", [](auto& c, auto& k, auto& v) { c.fdtd.memory_budget_gb = parse_double(k, v); }},

        {"compare.region_radius", [](auto& c, auto& k, auto& v) { c.compare.region_radius = parse_double(k, v); }},
        {"compare.r_excl_cells", [](auto& c, auto& k, auto& v) { c.compare.r_excl_cells = int(parse_int(k, v)); }},
        {"compare.times", [](auto& c, auto& k, auto& v) { c.compare.times = parse_list(k, v); }},

        {"quality.route_tol", [](auto& c, auto& k, auto& v) { c.quality.route_tol = parse_double(k, v); }},

        {"sphere_order", [](auto& c, auto& k, auto& v) { c.sphere_order = int(parse_int(k, v)); }},
        {"output.dir", [](auto& c, auto& k, auto& v) { (void)k; c.output_dir = v; }},
        {"seed", [](auto& c, auto& k, auto& v) { c.seed = std::uint64_t(parse_int(k, v)); }},
        {"threads", [](auto& c, auto& k, auto& v) { c.threads = int(parse_int(k, v)); }},
    };
    return table;
}

} // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::map<std::string, bool> seen;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError(origin + ":" + std::to_string(lineno) +
                                  ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto it = schema().find(key);
        if (it == schema().end())
            throw ValidationError(origin + ":" + std::to_string(lineno) + ": unknown key '" +
                                  key + "'");
        if (seen[key])
            throw ValidationError(origin + ":" + std::to_string(lineno) + ": duplicate key '" +
                                  key + "'");
        seen[key] = true;
        it->second(cfg, key, value);
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path, const CliOverrides& overrides) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    ExperimentConfig cfg = parse_config_text(ss.str(), path);

    for (const auto& [key, setter] : schema()) {
        if (const char* env = std::getenv(env_name(key).c_str()))
            setter(cfg, key, env);
    }
    if (overrides.eps) cfg.fdtd.eps = {*overrides.eps};
    if (overrides.out_dir) cfg.output_dir = *overrides.out_dir;
    if (overrides.threads) cfg.threads = *overrides.threads;
    if (overrides.seed) cfg.seed = *overrides.seed;
    cfg.validate();
    return cfg;
}

CauchyBundle ExperimentConfig::make_bundle() const {
    CauchyBundle b;
    if (phi.amplitude != 0.0)
        b.phi.push_back(make_bump(phi.center, phi.radius, phi.amplitude, phi.smoothness));
    if (psi.amplitude != 0.0)
        b.psi.push_back(make_bump(psi.center, psi.radius, psi.amplitude, psi.smoothness));
    if (source.amplitude != 0.0) {
        SeparableSource s;
        s.spatial = make_bump(source.center, source.radius, 1.0, source.smoothness);
        s.time = make_time_bump(source.time_center, source.time_width, source.amplitude,
                                source.time_smoothness);
        b.sources.push_back(std::move(s));
    }
    return b;
}

double ExperimentConfig::grid_pitch(double eps) const {
    const double base = fdtd.common_grid
                            ? *std::min_element(fdtd.eps.begin(), fdtd.eps.end())
                            : eps;
    return base * domain.diameter() / fdtd.n_min;
}

double ExperimentConfig::horizon_for(double eps) const {
    return time.eps_power ? std::pow(eps, -time.tau) : time.horizon;
}

double ExperimentConfig::box_half_width_for(double T) const {
    if (fdtd.box_half_width > 0.0) return fdtd.box_half_width;
    const CauchyBundle b = make_bundle();
    const double rho_max = b.empty() ? 0.0 : b.rho_max();
    // reflections from the Dirichlet wall must not reach the comparison
    // region within T: L > (T + rho_max + R_c) / 2
    return 0.5 * (T + rho_max + compare.region_radius) + 0.1;
}

void ExperimentConfig::validate() const {
    if (spectral.resolution < 8)
        throw ValidationError("spectral.resolution must be >= 8");
    if (spectral.modes < 0 || spectral.max_modes < 1)
        throw ValidationError("spectral.modes / max_modes out of range");
    if (!(spectral.captured_mass_deficit > 0.0 && spectral.captured_mass_deficit < 1.0))
        throw ValidationError("spectral.captured_mass_deficit must lie in (0,1)");
    if (!(time.horizon > 0.0) || !(time.step > 0.0))
        throw ValidationError("time.horizon and time.step must be positive");
    if (time.eps_power && !(time.tau > 0.0 && time.tau < 1.0))
        throw ValidationError("time.tau must lie in (0,1)");
    if (fdtd.eps.empty()) throw ValidationError("fdtd.eps must list at least one value");
    for (double e : fdtd.eps)
        if (!(e > 0.0 && e < 1.0))
            throw ValidationError("every fdtd.eps must lie in (0,1)");
    if (!(fdtd.cfl > 0.0 && fdtd.cfl <= 0.95))
        throw ValidationError("fdtd.cfl must lie in (0, 0.95]");
    if (fdtd.n_min < 1) throw ValidationError("fdtd.n_min must be >= 1");
    if (!(compare.region_radius > 0.0))
        throw ValidationError("compare.region_radius must be positive");
    if (compare.r_excl_cells < 0)
        throw ValidationError("compare.r_excl_cells must be >= 0");
    if (compare.times.empty())
        throw ValidationError("compare.times must list at least one time");
    if (!(quality.route_tol > 0.0))
        throw ValidationError("quality.route_tol must be positive");
    if (sphere_order < 3) throw ValidationError("sphere_order must be >= 3");
    for (int s : {phi.smoothness, psi.smoothness, source.smoothness})
        if (s < 4)
            throw ValidationError("data smoothness must be >= 4 so the lap^2 stack stays "
                                  "continuous");

    const CauchyBundle b = make_bundle();
    b.validate();
    if (!b.empty()) {
        if (time.step > b.rho_min() / 8.0)
            throw ValidationError("time.step must be <= rho_min/8 (wavefront resolution)");
        double t_max = 0.0;
        for (double e : fdtd.eps) t_max = std::max(t_max, horizon_for(e));
        if (!time.eps_power)
            for (double t : compare.times)
                if (t > time.horizon + 1e-12)
                    throw ValidationError("compare.times must not exceed time.horizon");

        // per-eps FDTD memory plan: 4 double arrays plus snapshots
        std::vector<double> feasible;
        std::ostringstream plan;
        bool over = false;
        for (double e : fdtd.eps) {
            const double T = horizon_for(e);
            const double L = box_half_width_for(T);
            const double h = grid_pitch(e);
            const double n = std::ceil(2.0 * L / h);
            const double bytes = n * n * n * 8.0 * 4.2;
            if (bytes > fdtd.memory_budget_gb * 1e9) {
                over = true;
                plan << " eps=" << e << " needs ~" << bytes / 1e9 << " GB;";
            } else {
                feasible.push_back(e);
            }
        }
        if (over) {
            std::ostringstream os;
            os << "fdtd memory budget exceeded:" << plan.str() << " feasible eps:";
            for (double e : feasible) os << ' ' << e;
            if (feasible.empty()) os << " none";
            throw ValidationError(os.str());
        }
    }
}

ConfigEcho ExperimentConfig::echo() const {
    ConfigEcho e;
    auto add = [&](const std::string& k, const std::string& v) { e.emplace_back(k, v); };
    add("domain.shape", to_string(domain.shape));
    add("domain.radius", format_double(domain.radius));
    add("domain.half_widths", vec3_str(domain.half_widths));
    add("domain.semi_axes", vec3_str(domain.semi_axes));
    add("domain.center", vec3_str(domain.center));
    add("data.phi.amplitude", format_double(phi.amplitude));
    add("data.phi.center", vec3_str(phi.center));
    add("data.phi.radius", format_double(phi.radius));
    add("data.phi.smoothness", std::to_string(phi.smoothness));
    add("data.psi.amplitude", format_double(psi.amplitude));
    add("data.psi.center", vec3_str(psi.center));
    add("data.psi.radius", format_double(psi.radius));
    add("data.psi.smoothness", std::to_string(psi.smoothness));
    add("data.source.amplitude", format_double(source.amplitude));
    add("data.source.center", vec3_str(source.center));
    add("data.source.radius", format_double(source.radius));
    add("data.source.smoothness", std::to_string(source.smoothness));
    add("data.source.time_center", format_double(source.time_center));
    add("data.source.time_width", format_double(source.time_width));
    add("data.source.time_smoothness", std::to_string(source.time_smoothness));
    add("spectral.resolution", std::to_string(spectral.resolution));
    add("spectral.modes", std::to_string(spectral.modes));
    add("spectral.captured_mass_deficit", format_double(spectral.captured_mass_deficit));
    add("spectral.max_modes", std::to_string(spectral.max_modes));
    add("spectral.solver",
        spectral.solver == EigensolveOptions::Solver::lanczos ? "lanczos" : "dense");
    add("spectral.matvec", spectral.matvec == MatvecPath::automatic ? "auto"
                           : spectral.matvec == MatvecPath::direct  ? "direct"
                                                                    : "fft");
    add("time.horizon", format_double(time.horizon));
    add("time.step", format_double(time.step));
    add("time.eps_power", time.eps_power ? "true" : "false");
    add("time.tau", format_double(time.tau));
    add("fdtd.eps", list_str(fdtd.eps));
    add("fdtd.n_min", std::to_string(fdtd.n_min));
    add("fdtd.cfl", format_double(fdtd.cfl));
    add("fdtd.boundary", fdtd.boundary == BoundaryMode::causal_box ? "causal" : "sponge");
    add("fdtd.sponge_cells", std::to_string(fdtd.sponge_cells));
    add("fdtd.blend", fdtd.blend ? "true" : "false");
    add("fdtd.grid_mode", fdtd.common_grid ? "common" : "per_eps");
    add("fdtd.box_half_width", format_double(fdtd.box_half_width));
    add("fdtd.memory_budget_gb", format_double(fdtd.memory_budget_gb));
    add("compare.region_radius", format_double(compare.region_radius));
    add("compare.r_excl_cells", std::to_string(compare.r_excl_cells));
    add("compare.times", list_str(compare.times));
    add("quality.route_tol", format_double(quality.route_tol));
    add("sphere_order", std::to_string(sphere_order));
    add("output.dir", output_dir);
    add("seed", std::to_string(seed));
    add("threads", std::to_string(threads));
    return e;
}

} // namespace pointwave
