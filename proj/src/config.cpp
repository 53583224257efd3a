#include "chfv/config.hpp"

#include "chfv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

namespace chfv {

namespace {

const std::vector<std::string> known_keys = {
    "preset", "model", "mesh", "nx", "ny", "lx", "ly", "mesh_file",
    "alpha", "chi", "theta1", "theta2", "m1", "m2", "psi1", "psi2",
    "initial", "uniform_value", "initial_file", "cross_width", "cross_length",
    "spinodal_amplitude", "spinodal_mean", "seed", "rng",
    "t_end", "dt0", "newton_tol", "newton_max_iter",
    "output_dir", "output_times", "jko_tau", "jko_steps",
};

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v)
{
    try {
        size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("key `" + key + "`: cannot parse number from `" + v + "`");
    }
}

int to_int(const std::string& key, const std::string& v)
{
    try {
        size_t pos = 0;
        const int i = std::stoi(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw ConfigError("key `" + key + "`: cannot parse integer from `" + v + "`");
    }
}

std::map<std::string, std::string> read_key_values(std::istream& in, const std::string& label)
{
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(label + ":" + std::to_string(lineno) + ": expected `key = value`");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (std::find(known_keys.begin(), known_keys.end(), key) == known_keys.end())
            throw ConfigError(label + ":" + std::to_string(lineno) + ": unknown key `" + key + "`");
        if (kv.count(key))
            throw ConfigError(label + ":" + std::to_string(lineno) + ": duplicate key `" + key + "`");
        if (value.empty())
            throw ConfigError(label + ":" + std::to_string(lineno) + ": empty value for `" + key + "`");
        kv[key] = value;
    }
    return kv;
}

// Experiment presets; explicit keys in the file override these.
void apply_preset(const std::string& name, RunConfig& cfg)
{
    if (name == "cross") {
        cfg.mesh_kind = "cartesian";
        cfg.nx = cfg.ny = 32;
        cfg.lx = cfg.ly = 1.0;
        cfg.alpha = 3.6e-4;
        cfg.chi = 0.8;
        cfg.theta1 = cfg.theta2 = 0.0;
        cfg.m1 = cfg.m2 = 1.0;
        cfg.psi1_spec = cfg.psi2_spec = "zero";
        cfg.initial_kind = "cross";
        cfg.t_end = 0.1;
        cfg.dt0 = 1e-4;
        cfg.output_times = {1e-2, 2e-2, 1e-1};
    } else if (name == "spinodal") {
        cfg.mesh_kind = "cartesian";
        cfg.nx = cfg.ny = 32;
        cfg.lx = cfg.ly = 1.0;
        cfg.alpha = 3e-4;
        cfg.chi = 0.96;
        cfg.theta1 = cfg.theta2 = 0.0;
        cfg.m1 = cfg.m2 = 1.0;
        cfg.psi1_spec = cfg.psi2_spec = "zero";
        cfg.initial_kind = "spinodal";
        cfg.spinodal_amplitude = 0.01;
        cfg.spinodal_mean = 0.5;
        cfg.t_end = 0.1;
        cfg.dt0 = 1e-4;
        cfg.output_times = {6e-3, 5e-2, 1e-1};
    } else {
        throw ConfigError("unknown preset `" + name + "` (expected cross or spinodal)");
    }
}

std::vector<double> parse_time_list(const std::string& v)
{
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty())
            out.push_back(to_double("output_times", item));
    }
    return out;
}

void validate_config(const RunConfig& cfg)
{
    if (cfg.mesh_kind == "cartesian") {
        if (cfg.nx < 1)
            throw ConfigError("nx must be >= 1");
        if (!(cfg.lx > 0.0))
            throw ConfigError("lx must be positive");
        if (cfg.ny > 0 && !(cfg.ly > 0.0))
            throw ConfigError("ly must be positive for a 2D grid");
    } else if (cfg.mesh_kind == "file") {
        if (cfg.mesh_file.empty())
            throw ConfigError("mesh = file requires mesh_file");
    } else {
        throw ConfigError("mesh must be `cartesian` or `file`");
    }

    if (!(cfg.alpha > 0.0))
        throw ConfigError("alpha must be positive");
    if (!(cfg.chi > 0.0))
        throw ConfigError("chi must be positive");
    if (cfg.theta1 < 0.0 || cfg.theta2 < 0.0)
        throw ConfigError("theta must be non-negative");
    if (cfg.model == ModelKind::local && (cfg.theta1 != 0.0 || cfg.theta2 != 0.0))
        throw ConfigError("theta > 0 contradicts model = local (no thermal term)");
    if (!(cfg.m1 > 0.0) || !(cfg.m2 > 0.0))
        throw ConfigError("mobilities must be positive");

    if (cfg.initial_kind.empty())
        throw ConfigError("missing required key `initial`");
    if (cfg.initial_kind == "spinodal" && !cfg.seed)
        throw ConfigError("spinodal initial condition requires a seed");
    if (cfg.initial_kind == "file" && cfg.initial_file.empty())
        throw ConfigError("initial = file requires a path (initial = file:PATH)");
    if (cfg.rng != "mt19937_64")
        throw ConfigError("unsupported rng `" + cfg.rng + "` (only mt19937_64)");

    if (cfg.t_end < 0.0)
        throw ConfigError("t_end must be non-negative");
    if (!(cfg.dt0 > 0.0))
        throw ConfigError("dt0 must be positive");
    if (!(cfg.newton.tol_residual > 0.0))
        throw ConfigError("newton_tol must be positive");
    if (cfg.newton.max_iter < 1)
        throw ConfigError("newton_max_iter must be >= 1");
    if (!(cfg.jko_tau > 0.0))
        throw ConfigError("jko_tau must be positive");
    if (cfg.jko_steps < 0)
        throw ConfigError("jko_steps must be non-negative");
    for (double t : cfg.output_times)
        if (t < 0.0)
            throw ConfigError("output_times must be non-negative");
}

} // namespace

RunConfig parse_config_text(const std::string& text, const std::string& label)
{
    std::istringstream in(text);
    auto kv = read_key_values(in, label);

    RunConfig cfg;
    if (auto it = kv.find("preset"); it != kv.end()) {
        apply_preset(it->second, cfg);
        kv.erase(it);
    }

    auto take = [&](const char* key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end())
            return std::nullopt;
        std::string v = it->second;
        kv.erase(it);
        return v;
    };

    if (auto v = take("model")) {
        if (*v == "nonlocal")
            cfg.model = ModelKind::nonlocal;
        else if (*v == "local")
            cfg.model = ModelKind::local;
        else
            throw ConfigError("model must be `nonlocal` or `local`");
    }
    if (auto v = take("mesh"))
        cfg.mesh_kind = *v;
    if (auto v = take("nx"))
        cfg.nx = to_int("nx", *v);
    if (auto v = take("ny"))
        cfg.ny = to_int("ny", *v);
    if (auto v = take("lx"))
        cfg.lx = to_double("lx", *v);
    if (auto v = take("ly"))
        cfg.ly = to_double("ly", *v);
    if (auto v = take("mesh_file"))
        cfg.mesh_file = *v;
    if (auto v = take("alpha"))
        cfg.alpha = to_double("alpha", *v);
    if (auto v = take("chi"))
        cfg.chi = to_double("chi", *v);
    if (auto v = take("theta1"))
        cfg.theta1 = to_double("theta1", *v);
    if (auto v = take("theta2"))
        cfg.theta2 = to_double("theta2", *v);
    if (auto v = take("m1"))
        cfg.m1 = to_double("m1", *v);
    if (auto v = take("m2"))
        cfg.m2 = to_double("m2", *v);
    if (auto v = take("psi1"))
        cfg.psi1_spec = *v;
    if (auto v = take("psi2"))
        cfg.psi2_spec = *v;
    if (auto v = take("initial")) {
        std::string s = *v;
        if (s.rfind("uniform:", 0) == 0) {
            cfg.initial_kind = "uniform";
            cfg.uniform_value = to_double("initial", s.substr(8));
        } else if (s.rfind("file:", 0) == 0) {
            cfg.initial_kind = "file";
            cfg.initial_file = s.substr(5);
        } else {
            cfg.initial_kind = s;
            if (s != "cross" && s != "spinodal")
                throw ConfigError("initial must be cross, spinodal, uniform:VALUE or file:PATH");
        }
    }
    if (auto v = take("uniform_value"))
        cfg.uniform_value = to_double("uniform_value", *v);
    if (auto v = take("initial_file"))
        cfg.initial_file = *v;
    if (auto v = take("cross_width"))
        cfg.cross_width = to_double("cross_width", *v);
    if (auto v = take("cross_length"))
        cfg.cross_length = to_double("cross_length", *v);
    if (auto v = take("spinodal_amplitude"))
        cfg.spinodal_amplitude = to_double("spinodal_amplitude", *v);
    if (auto v = take("spinodal_mean"))
        cfg.spinodal_mean = to_double("spinodal_mean", *v);
    if (auto v = take("seed")) {
        try {
            cfg.seed = std::stoull(*v);
        } catch (const std::exception&) {
            throw ConfigError("seed: cannot parse unsigned integer from `" + *v + "`");
        }
    }
    if (auto v = take("rng"))
        cfg.rng = *v;
    if (auto v = take("t_end"))
        cfg.t_end = to_double("t_end", *v);
    if (auto v = take("dt0"))
        cfg.dt0 = to_double("dt0", *v);
    if (auto v = take("newton_tol"))
        cfg.newton.tol_residual = to_double("newton_tol", *v);
    if (auto v = take("newton_max_iter"))
        cfg.newton.max_iter = to_int("newton_max_iter", *v);
    if (auto v = take("output_dir"))
        cfg.output_dir = *v;
    if (auto v = take("output_times"))
        cfg.output_times = parse_time_list(*v);
    if (auto v = take("jko_tau"))
        cfg.jko_tau = to_double("jko_tau", *v);
    if (auto v = take("jko_steps"))
        cfg.jko_steps = to_int("jko_steps", *v);

    validate_config(cfg);
    return cfg;
}

RunConfig parse_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

Mesh build_mesh(const RunConfig& cfg)
{
    if (cfg.mesh_kind == "file")
        return Mesh::import_delaunay(cfg.mesh_file);
    if (cfg.ny > 0)
        return Mesh::cartesian2d(cfg.nx, cfg.ny, cfg.lx, cfg.ly);
    return Mesh::cartesian1d(cfg.nx, cfg.lx);
}

namespace {

std::vector<double> resolve_psi(const std::string& spec, const Mesh& mesh)
{
    const size_t n = static_cast<size_t>(mesh.num_cells());
    if (spec == "zero")
        return std::vector<double>(n, 0.0);
    if (spec.rfind("linear:", 0) == 0) {
        const std::string rest = spec.substr(7);
        double gx = 0.0, gy = 0.0;
        const auto comma = rest.find(',');
        if (comma == std::string::npos) {
            gx = to_double("psi", rest);
        } else {
            gx = to_double("psi", trim(rest.substr(0, comma)));
            gy = to_double("psi", trim(rest.substr(comma + 1)));
        }
        std::vector<double> psi(n);
        for (int k = 0; k < mesh.num_cells(); ++k)
            psi[static_cast<size_t>(k)] = gx * mesh.cell(k).center[0] + gy * mesh.cell(k).center[1];
        return psi;
    }
    if (spec.rfind("file:", 0) == 0) {
        const std::string path = spec.substr(5);
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open field file: " + path);
        std::vector<double> psi;
        std::string line;
        while (std::getline(in, line)) {
            line = trim(line);
            if (line.empty())
                continue;
            psi.push_back(to_double("psi field", line));
        }
        if (psi.size() != n)
            throw ConfigError("field file " + path + " has " + std::to_string(psi.size()) +
                              " values for " + std::to_string(n) + " cells");
        return psi;
    }
    throw ConfigError("psi spec must be zero, linear:gx[,gy] or file:PATH; got `" + spec + "`");
}

// The documented uniform mapping: 53 high bits of the raw 64-bit output.
double uniform01(std::mt19937_64& gen)
{
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

} // namespace

ModelParams build_params(const RunConfig& cfg, const Mesh& mesh)
{
    ModelParams p;
    p.alpha = cfg.alpha;
    p.chi = cfg.chi;
    p.theta = {cfg.theta1, cfg.theta2};
    p.mobility = {cfg.m1, cfg.m2};
    p.kind = cfg.model;
    p.psi1 = resolve_psi(cfg.psi1_spec, mesh);
    p.psi2 = resolve_psi(cfg.psi2_spec, mesh);
    p.validate(mesh.num_cells());
    return p;
}

State initial_condition(const RunConfig& cfg, const Mesh& mesh)
{
    State s;
    s.kind = cfg.model;
    s.time = 0.0;
    const size_t n = static_cast<size_t>(mesh.num_cells());
    s.c1.assign(n, 0.0);

    if (cfg.initial_kind == "uniform") {
        if (cfg.uniform_value < 0.0 || cfg.uniform_value > 1.0)
            throw ConfigError("uniform initial value must lie in [0,1]");
        std::fill(s.c1.begin(), s.c1.end(), cfg.uniform_value);
    } else if (cfg.initial_kind == "cross") {
        if (mesh.dim() != 2)
            throw ConfigError("cross initial condition requires a 2D mesh");
        double xmin = std::numeric_limits<double>::max(), xmax = -xmin;
        double ymin = xmin, ymax = -xmin;
        for (const Point& p : mesh.points()) {
            xmin = std::min(xmin, p[0]);
            xmax = std::max(xmax, p[0]);
            ymin = std::min(ymin, p[1]);
            ymax = std::max(ymax, p[1]);
        }
        const double lx = xmax - xmin;
        const double w = (cfg.cross_width > 0.0) ? cfg.cross_width : 0.2 * lx;
        const double l = (cfg.cross_length > 0.0) ? cfg.cross_length : 0.8 * lx;
        const double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
        // finite-volume projection of the indicator: cells cut by the cross
        // boundary carry the exact covered fraction, so the rasterized mass
        // is 2 w l - w^2 on any covering grid
        auto overlap = [](double lo, double hi, double a, double b) {
            return std::max(0.0, std::min(hi, b) - std::max(lo, a));
        };
        for (int k = 0; k < mesh.num_cells(); ++k) {
            const auto& verts = mesh.cell_points()[static_cast<size_t>(k)];
            if (verts.size() == 4) {
                double bx0 = std::numeric_limits<double>::max(), bx1 = -bx0;
                double by0 = bx0, by1 = -bx0;
                for (int v : verts) {
                    const Point& p = mesh.points()[static_cast<size_t>(v)];
                    bx0 = std::min(bx0, p[0]);
                    bx1 = std::max(bx1, p[0]);
                    by0 = std::min(by0, p[1]);
                    by1 = std::max(by1, p[1]);
                }
                const double horiz = overlap(bx0, bx1, cx - 0.5 * l, cx + 0.5 * l) *
                                     overlap(by0, by1, cy - 0.5 * w, cy + 0.5 * w);
                const double vert = overlap(bx0, bx1, cx - 0.5 * w, cx + 0.5 * w) *
                                    overlap(by0, by1, cy - 0.5 * l, cy + 0.5 * l);
                const double both = overlap(bx0, bx1, cx - 0.5 * w, cx + 0.5 * w) *
                                    overlap(by0, by1, cy - 0.5 * w, cy + 0.5 * w);
                s.c1[static_cast<size_t>(k)] =
                    std::clamp((horiz + vert - both) / ((bx1 - bx0) * (by1 - by0)), 0.0, 1.0);
            } else {
                const Point& c = mesh.cell(k).center;
                const bool horiz = std::abs(c[0] - cx) <= 0.5 * l && std::abs(c[1] - cy) <= 0.5 * w;
                const bool vert = std::abs(c[0] - cx) <= 0.5 * w && std::abs(c[1] - cy) <= 0.5 * l;
                s.c1[static_cast<size_t>(k)] = (horiz || vert) ? 1.0 : 0.0;
            }
        }
    } else if (cfg.initial_kind == "spinodal") {
        if (!cfg.seed)
            throw ConfigError("spinodal initial condition requires a seed");
        const double a = cfg.spinodal_amplitude;
        std::mt19937_64 gen(*cfg.seed);
        for (size_t k = 0; k < n; ++k)
            s.c1[k] = cfg.spinodal_mean + a * (2.0 * uniform01(gen) - 1.0);
        // mean-correct to the exact target mass, then clamp
        double mass = 0.0, vol = 0.0;
        for (int k = 0; k < mesh.num_cells(); ++k) {
            mass += mesh.cell(k).measure * s.c1[static_cast<size_t>(k)];
            vol += mesh.cell(k).measure;
        }
        const double shift = cfg.spinodal_mean - mass / vol;
        for (double& v : s.c1)
            v = std::clamp(v + shift, 0.0, 1.0);
    } else if (cfg.initial_kind == "file") {
        std::ifstream in(cfg.initial_file);
        if (!in)
            throw ConfigError("cannot open initial field file: " + cfg.initial_file);
        std::vector<double> vals;
        std::string line;
        while (std::getline(in, line)) {
            line = trim(line);
            if (line.empty())
                continue;
            vals.push_back(to_double("initial field", line));
        }
        if (vals.size() != n)
            throw ConfigError("initial field file has " + std::to_string(vals.size()) +
                              " values for " + std::to_string(n) + " cells");
        for (double v : vals)
            if (v < 0.0 || v > 1.0)
                throw ConfigError("initial field values must lie in [0,1]");
        s.c1 = std::move(vals);
    } else {
        throw ConfigError("unsupported initial condition `" + cfg.initial_kind + "`");
    }
    return s;
}

} // namespace chfv
