#pragma once

#include "chfv/mesh.hpp"
#include "chfv/model.hpp"
#include "chfv/solver.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace chfv {

struct BoundsCheck {
    bool pass = true;
    double worst_violation = 0.0; // distance outside [0,1], 0 when passing
    int worst_cell = -1;
};

/// Exact closed-interval check 0 <= c1 <= 1 on every cell (no tolerance;
/// intended for converged states only).
BoundsCheck check_bounds(const State& state);

struct MassDrift {
    std::optional<double> phase1; // max |m(t)-m(0)|/m(0); empty if m(0) = 0
    std::optional<double> phase2;
};

/// Max relative mass drift per phase over every accepted step of a run.
MassDrift mass_drift(const Trajectory& trajectory);

/// sum |K| over cells with lo < c1_K < hi; the scalar separation proxy.
double mixed_region_measure(const Mesh& mesh, const State& state, double lo = 0.1, double hi = 0.9);

struct EnergyComparisonRow {
    double time = 0.0;
    double e_nonlocal = 0.0;
    double e_local = 0.0;
};

/// Tabulates both runs' total energies at the sample times. Requires
/// identical initial energies (same datum, same grid) within 1e-12.
std::vector<EnergyComparisonRow> energy_comparison(const Trajectory& traj_nonlocal,
                                                   const Trajectory& traj_local,
                                                   const std::vector<double>& times);

/// Per-step CSV columns:
/// t,e_dir,e_chem,e_therm,e_ext,e_total,entropy1,entropy2,mass1,mass2,mixed_measure
void write_energy_csv(std::ostream& out, const Trajectory& trajectory);

void write_comparison_csv(std::ostream& out, const std::vector<EnergyComparisonRow>& rows);

} // namespace chfv
