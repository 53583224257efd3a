#include "chfv/experiment.hpp"

#include "chfv/errors.hpp"
#include "chfv/vtk.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace chfv {

namespace {

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot open output file: " + path.string());
    return out;
}

std::string snapshot_name(size_t index, double t)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "snapshot_%03zu_t%.6g.vtk", index, t);
    return buf;
}

void write_snapshots(const std::filesystem::path& dir, const Mesh& mesh, const Trajectory& traj)
{
    for (size_t i = 0; i < traj.snapshots.size(); ++i) {
        const State& s = traj.snapshots[i];
        char title[64];
        std::snprintf(title, sizeof(title), "t = %.10g", s.time);
        write_vtk_file((dir / snapshot_name(i, s.time)).string(), mesh, s, title);
    }
}

Trajectory run_one(const RunConfig& cfg, const Mesh& mesh, const ModelParams& params,
                   const State& initial, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    auto log = open_out(dir / "run.log");

    RunOptions opts;
    opts.t_end = cfg.t_end;
    opts.dt0 = cfg.dt0;
    opts.output_times = cfg.output_times;
    opts.newton = cfg.newton;
    opts.log = &log;

    Trajectory traj = run(mesh, params, initial, opts);

    auto csv = open_out(dir / "energy.csv");
    write_energy_csv(csv, traj);
    write_snapshots(dir, mesh, traj);
    return traj;
}

} // namespace

Trajectory run_experiment(const RunConfig& cfg)
{
    const Mesh mesh = build_mesh(cfg);
    const ModelParams params = build_params(cfg, mesh);
    const State initial = initial_condition(cfg, mesh);
    return run_one(cfg, mesh, params, initial, cfg.output_dir);
}

ComparisonResult compare_experiment(const RunConfig& cfg)
{
    if (cfg.theta1 != 0.0 || cfg.theta2 != 0.0)
        throw ConfigError("comparison runs require theta = (0,0): the local model has no thermal term");

    const Mesh mesh = build_mesh(cfg);
    const std::filesystem::path dir = cfg.output_dir;
    std::filesystem::create_directories(dir);

    RunConfig cfg_nl = cfg;
    cfg_nl.model = ModelKind::nonlocal;
    RunConfig cfg_loc = cfg;
    cfg_loc.model = ModelKind::local;

    // one initial saturation field for both models
    State initial_nl = initial_condition(cfg_nl, mesh);
    State initial_loc = initial_nl;
    initial_loc.kind = ModelKind::local;
    initial_loc.mu1.clear();
    initial_loc.mu2.clear();

    ComparisonResult result;
    result.nonlocal = run_one(cfg_nl, mesh, build_params(cfg_nl, mesh), initial_nl, dir / "nonlocal");
    result.local = run_one(cfg_loc, mesh, build_params(cfg_loc, mesh), initial_loc, dir / "local");

    std::vector<double> times = cfg.output_times;
    times.push_back(cfg.t_end);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    times.erase(std::remove_if(times.begin(), times.end(),
                               [&](double t) { return t < 0.0 || t > cfg.t_end + 1e-14; }),
                times.end());

    result.rows = energy_comparison(result.nonlocal, result.local, times);
    auto csv = open_out(dir / "comparison.csv");
    write_comparison_csv(csv, result.rows);
    return result;
}

JkoTrajectory jko_experiment(const RunConfig& cfg)
{
    if (cfg.mesh_kind != "cartesian" || cfg.ny > 0)
        throw ConfigError("jko1d requires a 1D cartesian mesh (nx, lx without ny)");
    const Mesh mesh = build_mesh(cfg);
    const ModelParams params = build_params(cfg, mesh);
    const State initial = initial_condition(cfg, mesh);

    Density1D d1{mesh.cell(0).measure, initial.c1};

    const std::filesystem::path dir = cfg.output_dir;
    std::filesystem::create_directories(dir);

    JkoTrajectory traj = jko_run(mesh, params, d1, cfg.jko_tau, cfg.jko_steps);

    auto csv = open_out(dir / "jko.csv");
    csv << "t,energy,w_sq,objective,iterations,converged,pg_norm\n";
    char buf[256];
    for (const JkoStepInfo& s : traj.steps) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%d,%d,%.17g\n",
                      s.time, s.energy, s.w_sq, s.objective, s.iterations,
                      s.converged ? 1 : 0, s.pg_norm);
        csv << buf;
    }

    auto states = open_out(dir / "jko_states.csv");
    for (size_t n = 0; n < traj.c1.size(); ++n) {
        std::snprintf(buf, sizeof(buf), "%.17g", static_cast<double>(n) * traj.tau);
        states << buf;
        for (double v : traj.c1[n]) {
            std::snprintf(buf, sizeof(buf), ",%.17g", v);
            states << buf;
        }
        states << "\n";
    }
    return traj;
}

} // namespace chfv
