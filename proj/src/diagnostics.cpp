#include "chfv/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace chfv {

BoundsCheck check_bounds(const State& state)
{
    BoundsCheck res;
    for (int k = 0; k < state.num_cells(); ++k) {
        const double c = state.c1[static_cast<size_t>(k)];
        double violation = 0.0;
        if (c < 0.0)
            violation = -c;
        else if (c > 1.0)
            violation = c - 1.0;
        if (violation > res.worst_violation) {
            res.worst_violation = violation;
            res.worst_cell = k;
        }
    }
    res.pass = (res.worst_violation == 0.0);
    return res;
}

MassDrift mass_drift(const Trajectory& trajectory)
{
    if (trajectory.steps.empty())
        throw std::invalid_argument("mass_drift: empty trajectory");
    MassDrift drift;
    const auto& m0 = trajectory.steps.front().energy.mass;
    double worst1 = 0.0, worst2 = 0.0;
    for (const StepRecord& rec : trajectory.steps) {
        if (m0[0] != 0.0)
            worst1 = std::max(worst1, std::abs(rec.energy.mass[0] - m0[0]) / std::abs(m0[0]));
        if (m0[1] != 0.0)
            worst2 = std::max(worst2, std::abs(rec.energy.mass[1] - m0[1]) / std::abs(m0[1]));
    }
    if (m0[0] != 0.0)
        drift.phase1 = worst1;
    if (m0[1] != 0.0)
        drift.phase2 = worst2;
    return drift;
}

double mixed_region_measure(const Mesh& mesh, const State& state, double lo, double hi)
{
    if (!(lo < hi))
        throw std::invalid_argument("mixed_region_measure: lo must be below hi");
    double measure = 0.0;
    for (int k = 0; k < mesh.num_cells(); ++k) {
        const double c = state.c1[static_cast<size_t>(k)];
        if (c > lo && c < hi)
            measure += mesh.cell(k).measure;
    }
    return measure;
}

namespace {

double energy_at(const Trajectory& traj, double t)
{
    for (const StepRecord& rec : traj.steps)
        if (std::abs(rec.time - t) <= 1e-9 * std::max(1.0, t))
            return rec.energy.e_total;
    throw std::invalid_argument("energy_comparison: no step at time " + std::to_string(t));
}

} // namespace

std::vector<EnergyComparisonRow> energy_comparison(const Trajectory& traj_nonlocal,
                                                   const Trajectory& traj_local,
                                                   const std::vector<double>& times)
{
    if (traj_nonlocal.steps.empty() || traj_local.steps.empty())
        throw std::invalid_argument("energy_comparison: empty trajectory");
    const double e0_nl = traj_nonlocal.steps.front().energy.e_total;
    const double e0_loc = traj_local.steps.front().energy.e_total;
    if (std::abs(e0_nl - e0_loc) > 1e-12 * std::max(1.0, std::abs(e0_nl)))
        throw std::invalid_argument("energy_comparison: runs start from different energies");

    std::vector<EnergyComparisonRow> rows;
    rows.reserve(times.size());
    for (double t : times)
        rows.push_back({t, energy_at(traj_nonlocal, t), energy_at(traj_local, t)});
    return rows;
}

void write_energy_csv(std::ostream& out, const Trajectory& trajectory)
{
    out << "t,e_dir,e_chem,e_therm,e_ext,e_total,entropy1,entropy2,mass1,mass2,mixed_measure\n";
    char buf[512];
    for (const StepRecord& rec : trajectory.steps) {
        const EnergyReport& e = rec.energy;
        std::snprintf(buf, sizeof(buf),
                      "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      rec.time, e.e_dir, e.e_chem, e.e_therm, e.e_ext, e.e_total,
                      e.entropy[0], e.entropy[1], e.mass[0], e.mass[1], rec.mixed_measure);
        out << buf;
    }
}

void write_comparison_csv(std::ostream& out, const std::vector<EnergyComparisonRow>& rows)
{
    out << "t,e_nonlocal,e_local\n";
    char buf[256];
    for (const EnergyComparisonRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", r.time, r.e_nonlocal, r.e_local);
        out << buf;
    }
}

} // namespace chfv
