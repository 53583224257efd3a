#include "chfv/config.hpp"
#include "chfv/diagnostics.hpp"
#include "chfv/errors.hpp"
#include "chfv/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_solver = 3;

int cmd_run(const std::string& config_path)
{
    const chfv::RunConfig cfg = chfv::parse_config(config_path);
    const chfv::Trajectory traj = chfv::run_experiment(cfg);
    const chfv::MassDrift drift = chfv::mass_drift(traj);
    std::printf("run finished: %zu accepted steps, final e_total %.12g\n",
                traj.steps.size() - 1, traj.steps.back().energy.e_total);
    if (drift.phase1)
        std::printf("mass drift: phase1 %.3e, phase2 %.3e\n", *drift.phase1,
                    drift.phase2 ? *drift.phase2 : 0.0);
    for (const chfv::State& s : traj.snapshots) {
        const auto bounds = chfv::check_bounds(s);
        if (!bounds.pass) {
            std::fprintf(stderr, "bounds violated at t %.6g: cell %d off by %.3e\n",
                         s.time, bounds.worst_cell, bounds.worst_violation);
            return exit_solver;
        }
    }
    return exit_ok;
}

int cmd_compare(const std::string& config_path)
{
    const chfv::RunConfig cfg = chfv::parse_config(config_path);
    const chfv::ComparisonResult result = chfv::compare_experiment(cfg);
    std::printf("comparison finished (%zu sample times)\n", result.rows.size());
    for (const auto& row : result.rows)
        std::printf("  t %.6g  e_nonlocal %.10g  e_local %.10g\n", row.time, row.e_nonlocal,
                    row.e_local);
    return exit_ok;
}

int cmd_jko(const std::string& config_path)
{
    const chfv::RunConfig cfg = chfv::parse_config(config_path);
    const chfv::JkoTrajectory traj = chfv::jko_experiment(cfg);
    int stalled = 0;
    for (const auto& s : traj.steps)
        if (!s.converged)
            ++stalled;
    std::printf("jko finished: %zu steps, final energy %.12g%s\n", traj.steps.size() - 1,
                traj.steps.back().energy,
                stalled ? (" (" + std::to_string(stalled) + " steps stalled)").c_str() : "");
    return exit_ok;
}

int cmd_check_mesh(const std::string& mesh_path)
{
    const chfv::Mesh mesh = chfv::Mesh::import_delaunay(mesh_path);
    std::printf("mesh ok: %d cells, %d faces (%zu interior), domain measure %.12g\n",
                mesh.num_cells(), mesh.num_faces(), mesh.interior_faces().size(),
                mesh.domain_measure());
    if (mesh.exterior_center_count() > 0)
        std::printf("warning: %d triangle(s) have their circumcenter outside the triangle\n",
                    mesh.exterior_center_count());
    return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"finite-volume simulator for two-phase Cahn-Hilliard dynamics"};
    app.require_subcommand(1);

    std::string config_path, mesh_path;
    auto* run_cmd = app.add_subcommand("run", "single-model simulation from a config file");
    run_cmd->add_option("config", config_path, "config file")->required();
    auto* compare_cmd = app.add_subcommand("compare", "run both models from one initial state");
    compare_cmd->add_option("config", config_path, "config file")->required();
    auto* jko_cmd = app.add_subcommand("jko1d", "1D minimizing-movement run");
    jko_cmd->add_option("config", config_path, "config file")->required();
    auto* check_cmd = app.add_subcommand("check-mesh", "validate a mesh file");
    check_cmd->add_option("meshfile", mesh_path, "mesh file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed())
            return cmd_run(config_path);
        if (compare_cmd->parsed())
            return cmd_compare(config_path);
        if (jko_cmd->parsed())
            return cmd_jko(config_path);
        if (check_cmd->parsed())
            return cmd_check_mesh(mesh_path);
    } catch (const chfv::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return exit_config;
    } catch (const chfv::MeshError& e) {
        std::fprintf(stderr, "mesh error: %s\n", e.what());
        return exit_config;
    } catch (const chfv::SolverError& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return exit_solver;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_solver;
    }
    return exit_ok;
}
