#pragma once

#include "chfv/config.hpp"
#include "chfv/diagnostics.hpp"
#include "chfv/jko1d.hpp"
#include "chfv/solver.hpp"

#include <string>

namespace chfv {

/// Single-model run: writes run.log, energy.csv, and one VTK snapshot per
/// output time (plus the initial state) into the output directory.
Trajectory run_experiment(const RunConfig& cfg);

struct ComparisonResult {
    Trajectory nonlocal;
    Trajectory local;
    std::vector<EnergyComparisonRow> rows;
};

/// Runs both models from the same initial state and emits both energy series
/// plus the comparison CSV.
ComparisonResult compare_experiment(const RunConfig& cfg);

/// Minimizing-movement run on a 1D grid; writes jko.csv and a CSV with the
/// density after each step.
JkoTrajectory jko_experiment(const RunConfig& cfg);

} // namespace chfv
