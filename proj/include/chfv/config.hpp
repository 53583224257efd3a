#pragma once

#include "chfv/mesh.hpp"
#include "chfv/model.hpp"
#include "chfv/solver.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace chfv {

/// Parsed run configuration. The flat key = value format, the presets and
/// all defaults are documented in docs/config_format.md.
struct RunConfig {
    // mesh
    std::string mesh_kind = "cartesian"; // "cartesian" | "file"
    int nx = 0;
    int ny = 0; // 0 selects a 1D grid
    double lx = 0.0;
    double ly = 0.0;
    std::string mesh_file;

    // model
    ModelKind model = ModelKind::nonlocal;
    double alpha = 0.0;
    double chi = 0.0;
    double theta1 = 0.0;
    double theta2 = 0.0;
    double m1 = 1.0;
    double m2 = 1.0;
    std::string psi1_spec = "zero";
    std::string psi2_spec = "zero";

    // initial condition
    std::string initial_kind; // "cross" | "spinodal" | "uniform" | "file"
    double uniform_value = 0.5;
    std::string initial_file;
    double cross_width = -1.0;  // negative: default 0.2 lx
    double cross_length = -1.0; // negative: default 0.8 lx
    double spinodal_amplitude = 0.01;
    double spinodal_mean = 0.5;
    std::optional<std::uint64_t> seed;
    std::string rng = "mt19937_64";

    // time stepping and output
    double t_end = 0.0;
    double dt0 = 1e-4;
    NewtonConfig newton;
    std::string output_dir = "out";
    std::vector<double> output_times;

    // jko1d subcommand
    double jko_tau = 1e-4;
    int jko_steps = 0;
};

/// Parses and validates a config file; unknown or duplicate keys and
/// contradictory settings are rejected with a ConfigError.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& label);

/// Builds the mesh a config describes.
Mesh build_mesh(const RunConfig& cfg);

/// Assembles ModelParams for the mesh, resolving the psi field specs
/// (`zero`, `linear:gx[,gy]`, `file:path`).
ModelParams build_params(const RunConfig& cfg, const Mesh& mesh);

/// Builds the initial state (saturations only; potentials are derived at the
/// start of a run). The spinodal perturbation uses the named 64-bit RNG with
/// the documented uniform mapping, then is mean-corrected to the exact target
/// mass and clamped to [0,1].
State initial_condition(const RunConfig& cfg, const Mesh& mesh);

} // namespace chfv
