// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Reuses the preset configurations the CLI ships with.

#include "chfv/config.hpp"
#include "chfv/diagnostics.hpp"
#include "chfv/experiment.hpp"
#include "chfv/jko1d.hpp"
#include "chfv/scheme.hpp"
#include "chfv/solver.hpp"

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

using namespace chfv;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& details)
{
    std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", id, what.c_str(),
                details.c_str());
    if (!pass)
        ++failures;
}

std::string fmt(const char* format, ...)
{
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

struct PresetRuns {
    Mesh mesh = Mesh::cartesian2d(2, 2, 1.0, 1.0); // replaced below
    Trajectory nonlocal;
    Trajectory local;
};

PresetRuns run_preset(const std::string& preset, std::uint64_t seed)
{
    std::string text = "preset = " + preset + "\nmodel = nonlocal\n";
    if (preset == "spinodal")
        text += "seed = " + std::to_string(seed) + "\n";
    RunConfig cfg = parse_config_text(text, "acceptance");

    PresetRuns runs;
    runs.mesh = build_mesh(cfg);
    const State initial_nl = initial_condition(cfg, runs.mesh);

    RunOptions opts;
    opts.t_end = cfg.t_end;
    opts.dt0 = cfg.dt0;
    opts.output_times = cfg.output_times;
    opts.newton = cfg.newton;

    runs.nonlocal = run(runs.mesh, build_params(cfg, runs.mesh), initial_nl, opts);

    RunConfig cfg_loc = cfg;
    cfg_loc.model = ModelKind::local;
    State initial_loc = initial_nl;
    initial_loc.kind = ModelKind::local;
    initial_loc.mu1.clear();
    initial_loc.mu2.clear();
    runs.local = run(runs.mesh, build_params(cfg_loc, runs.mesh), initial_loc, opts);
    return runs;
}

struct Coincidence1D {
    double gap = 0.0; // L2 distance between the models at t_end
};

Trajectory run_1d(int n, ModelKind kind, double alpha, double chi, double t_end, double dt0,
                  const std::vector<double>& output_times)
{
    const Mesh mesh = Mesh::cartesian1d(n, 1.0);
    ModelParams params;
    params.kind = kind;
    params.alpha = alpha;
    params.chi = chi;
    params.psi1.assign(static_cast<size_t>(n), 0.0);
    params.psi2.assign(static_cast<size_t>(n), 0.0);

    State s;
    s.kind = kind;
    s.c1.resize(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k)
        s.c1[static_cast<size_t>(k)] = 0.5 + 0.3 * std::cos(M_PI * mesh.cell(k).center[0]);

    RunOptions opts;
    opts.t_end = t_end;
    opts.dt0 = dt0;
    opts.output_times = output_times;
    return run(mesh, params, s, opts);
}

const State& snapshot_at(const Trajectory& traj, double t)
{
    for (const State& s : traj.snapshots)
        if (std::abs(s.time - t) <= 1e-9 * std::max(1.0, t))
            return s;
    throw std::runtime_error("missing snapshot at t = " + std::to_string(t));
}

} // namespace

int main()
{
    std::printf("running acceptance suite\n");

    // shared desk-scale runs: cross and spinodal presets, both models
    const PresetRuns cross = run_preset("cross", 0);
    const PresetRuns spin = run_preset("spinodal", 20240517);

    const struct {
        const char* name;
        const Trajectory* traj;
    } all_runs[] = {
        {"cross/nonlocal", &cross.nonlocal},
        {"cross/local", &cross.local},
        {"spinodal/nonlocal", &spin.nonlocal},
        {"spinodal/local", &spin.local},
    };

    // 1. bound preservation, exact, on every accepted state
    {
        bool pass = true;
        std::string details;
        for (const auto& r : all_runs) {
            double lo = 1.0, hi = 0.0;
            for (const StepRecord& rec : r.traj->steps) {
                lo = std::min(lo, rec.c1_min);
                hi = std::max(hi, rec.c1_max);
            }
            pass = pass && lo >= 0.0 && hi <= 1.0;
            details += fmt("%s min %.3e max-1 %.3e; ", r.name, lo, hi - 1.0);
        }
        report(1, pass, "bound preservation 0 <= c1 <= 1 on all accepted states", details);
    }

    // 2. mass conservation <= 1e-10 relative drift per phase
    {
        bool pass = true;
        std::string details;
        for (const auto& r : all_runs) {
            const MassDrift d = mass_drift(*r.traj);
            const double worst = std::max(d.phase1.value_or(0.0), d.phase2.value_or(0.0));
            pass = pass && worst <= 1e-10;
            details += fmt("%s %.3e; ", r.name, worst);
        }
        report(2, pass, "mass conservation (max relative drift <= 1e-10)", details);
    }

    // 3. energy dissipation: non-increasing within 1e-8 per step
    {
        bool pass = true;
        std::string details;
        for (const auto& r : all_runs) {
            double worst = 0.0;
            for (size_t i = 1; i < r.traj->steps.size(); ++i)
                worst = std::max(worst, r.traj->steps[i].energy.e_total -
                                            r.traj->steps[i - 1].energy.e_total);
            pass = pass && worst <= 1e-8;
            details += fmt("%s max increase %.3e; ", r.name, worst);
        }
        report(3, pass, "energy non-increasing across accepted steps", details);
    }

    // 4. faster non-local decay on the cross test
    {
        const std::vector<double> times = {1e-2, 2e-2, 1e-1};
        const auto rows = energy_comparison(cross.nonlocal, cross.local, times);
        bool pass = true;
        std::string details;
        for (const auto& row : rows) {
            pass = pass && row.e_nonlocal <= row.e_local + 1e-8;
            details += fmt("t=%.0e: nl %.6f loc %.6f; ", row.time, row.e_nonlocal, row.e_local);
        }
        report(4, pass, "E_nonlocal(t) <= E_local(t) + 1e-8 on the cross test", details);
    }

    // 5. 1D coincidence of the two models under refinement
    {
        const double alpha = 5e-3, chi = 0.8, t_end = 0.05, dt0 = 1e-4;
        std::vector<double> gaps;
        for (int n : {64, 128, 256}) {
            const Trajectory nl = run_1d(n, ModelKind::nonlocal, alpha, chi, t_end, dt0, {});
            const Trajectory loc = run_1d(n, ModelKind::local, alpha, chi, t_end, dt0, {});
            const State& a = snapshot_at(nl, t_end);
            const State& b = snapshot_at(loc, t_end);
            gaps.push_back(l2_gap(1.0 / n, a.c1, b.c1));
        }
        const bool pass = gaps[1] <= 0.02 && gaps[0] >= gaps[1] && gaps[1] >= gaps[2];
        report(5, pass, "1D non-local/local coincidence under refinement",
               fmt("gaps n=64: %.3e, n=128: %.3e, n=256: %.3e", gaps[0], gaps[1], gaps[2]));
    }

    // 6. JKO oracle agreement in 1D, improving as tau halves
    // 7. JKO objective monotonicity and square-distance summability
    {
        const int n = 64;
        const double alpha = 5e-3, chi = 0.8, t_cmp = 0.02;
        const Mesh mesh = Mesh::cartesian1d(n, 1.0);
        ModelParams params;
        params.kind = ModelKind::nonlocal;
        params.alpha = alpha;
        params.chi = chi;
        params.psi1.assign(static_cast<size_t>(n), 0.0);
        params.psi2.assign(static_cast<size_t>(n), 0.0);

        const Trajectory fv =
            run_1d(n, ModelKind::nonlocal, alpha, chi, t_cmp, 2e-5, {t_cmp});

        Density1D init{1.0 / n, std::vector<double>(static_cast<size_t>(n))};
        for (int k = 0; k < n; ++k)
            init.values[static_cast<size_t>(k)] =
                0.5 + 0.3 * std::cos(M_PI * mesh.cell(k).center[0]);

        const JkoTrajectory jko_coarse = jko_run(mesh, params, init, 1e-4, 200);
        const JkoTrajectory jko_fine = jko_run(mesh, params, init, 5e-5, 400);

        const double gap_coarse = compare_trajectories(mesh, fv, jko_coarse, {t_cmp})[0];
        const double gap_fine = compare_trajectories(mesh, fv, jko_fine, {t_cmp})[0];
        report(6, gap_coarse <= 0.05 && gap_fine <= gap_coarse,
               "JKO trajectory matches the FV non-local run",
               fmt("gap tau=1e-4: %.3e, tau=5e-5: %.3e", gap_coarse, gap_fine));

        bool mono = true;
        double worst_gap = 0.0, sum_wsq = 0.0;
        double e_min = jko_coarse.steps[0].energy;
        for (size_t i = 1; i < jko_coarse.steps.size(); ++i) {
            const double lhs = jko_coarse.steps[i].energy +
                               jko_coarse.steps[i].w_sq / (2.0 * jko_coarse.tau);
            const double slack = lhs - jko_coarse.steps[i - 1].energy;
            worst_gap = std::max(worst_gap, slack);
            mono = mono && slack <= 1e-9;
            sum_wsq += jko_coarse.steps[i].w_sq;
            e_min = std::min(e_min, jko_coarse.steps[i].energy);
        }
        const double budget = 2.0 * (jko_coarse.steps[0].energy - e_min) + 1e-8;
        report(7, mono && sum_wsq <= budget,
               "JKO objective monotonicity and square-distance bound",
               fmt("worst step slack %.3e, sum W^2 %.3e <= %.3e", worst_gap, sum_wsq, budget));
    }

    // 8. spinodal separation at t = 0.05
    {
        const double omega = spin.mesh.domain_measure();
        const State& s_nl = snapshot_at(spin.nonlocal, 0.05);
        const State& s_loc = snapshot_at(spin.local, 0.05);
        const double mixed0 = spin.nonlocal.steps.front().mixed_measure;
        const double mixed_nl = mixed_region_measure(spin.mesh, s_nl);
        const double mixed_loc = mixed_region_measure(spin.mesh, s_loc);
        const bool pass = mixed_nl <= 0.2 * omega && mixed_nl <= 0.25 * mixed0 &&
                          mixed_loc <= 0.2 * omega && mixed_loc <= 0.25 * mixed0;
        report(8, pass, "spinodal mixed region collapses by t = 0.05",
               fmt("initial %.3f -> nonlocal %.4f, local %.4f (|Omega| = %.1f)", mixed0,
                   mixed_nl, mixed_loc, omega));
    }

    // 9. Jacobian correctness on 2-8 cell meshes
    {
        double worst = 0.0;
        std::mt19937 gen(4242);
        std::uniform_real_distribution<double> uni(0.2, 0.8);
        for (int n : {2, 4, 8}) {
            const Mesh mesh = Mesh::cartesian1d(n, 1.0);
            ModelParams p;
            p.alpha = 0.02;
            p.chi = 0.8;
            p.theta = {0.1, 0.2};
            p.mobility = {1.0, 2.0};
            p.psi1.resize(static_cast<size_t>(n));
            p.psi2.resize(static_cast<size_t>(n));
            for (int k = 0; k < n; ++k) {
                p.psi1[static_cast<size_t>(k)] = 0.4 * k;
                p.psi2[static_cast<size_t>(k)] = -0.3 * k;
            }
            State s;
            s.c1.resize(static_cast<size_t>(n));
            for (double& v : s.c1)
                v = uni(gen);

            s.kind = ModelKind::nonlocal;
            p.kind = ModelKind::nonlocal;
            initialize_potentials(mesh, p, s);
            NonlocalStepSystem nl(mesh, p, s, 1e-3);
            worst = std::max(worst, jacobian_fd_check(nl, nl.pack(s), 1e-6));

            ModelParams pl = p;
            pl.kind = ModelKind::local;
            pl.theta = {0.0, 0.0};
            State sl = s;
            sl.kind = ModelKind::local;
            initialize_potentials(mesh, pl, sl);
            LocalStepSystem loc(mesh, pl, sl, 1e-3);
            worst = std::max(worst, jacobian_fd_check(loc, loc.pack(sl), 1e-6));
        }
        report(9, worst <= 1e-5, "analytic Jacobian matches central differences",
               fmt("max relative entry error %.3e", worst));
    }

    // 10. Wasserstein oracle unit values
    {
        Density1D a{1.0 / 32, std::vector<double>(32, 0.0)};
        Density1D b = a;
        for (int k = 0; k < 8; ++k)
            a.values[static_cast<size_t>(k)] = 1.0;
        for (int k = 16; k < 24; ++k)
            b.values[static_cast<size_t>(k)] = 1.0;
        double worst_translation = 0.0;
        for (double m : {1.0, 2.0, 0.5}) {
            const double w = wasserstein_1d(a, b, m);
            worst_translation = std::max(worst_translation, std::abs(w * w - 0.25 * 0.25 / m));
        }

        Density1D half_a{1.0 / 64, std::vector<double>(64, 0.0)};
        Density1D half_b = half_a;
        for (int k = 0; k < 32; ++k)
            half_a.values[static_cast<size_t>(k)] = 1.0;
        for (int k = 32; k < 64; ++k)
            half_b.values[static_cast<size_t>(k)] = 1.0;
        const double w_half = wasserstein_1d(half_a, half_b, 1.0);
        const double err_half = std::abs(w_half * w_half - 0.125);

        report(10, worst_translation <= 1e-12 && err_half <= 1e-10,
               "Wasserstein unit values (translation, half-interval)",
               fmt("translation err %.2e, half-interval err %.2e", worst_translation, err_half));
    }

    // 11. steepest-descent relation and normalization at accepted states
    {
        bool pass = true;
        double worst_rel = 0.0, worst_norm = 0.0;
        const NewtonConfig cfg; // the runs above used these defaults
        for (const Trajectory* traj : {&cross.nonlocal, &spin.nonlocal})
            for (const StepRecord& rec : traj->steps) {
                worst_rel = std::max(worst_rel, rec.potential_relation_residual);
                worst_norm = std::max(worst_norm, rec.normalization_residual);
            }
        // tolerance: Newton tol plus re-evaluation roundoff
        pass = worst_rel <= cfg.tol_residual + 5e-14 && worst_norm <= 1e-8;
        report(11, pass, "potential relation and ov-mu normalization at accepted states",
               fmt("max |mu1-mu2+alpha lap c1-chi(1-2c1)| %.3e, max |sum ov-mu| %.3e",
                   worst_rel, worst_norm));
    }

    std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
