#pragma once

#include "chfv/mesh.hpp"
#include "chfv/model.hpp"
#include "chfv/scheme.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace chfv {

/// Reusable sparse LU workspace: the symbolic analysis is done once per
/// sparsity pattern and reused across factorizations.
class LinearCache {
public:
    LinearCache();
    ~LinearCache();
    LinearCache(LinearCache&&) noexcept;
    LinearCache& operator=(LinearCache&&) noexcept;

    struct Impl;
    Impl& impl() { return *impl_; }

private:
    std::unique_ptr<Impl> impl_;
};

struct NewtonConfig {
    double tol_residual = 1e-12; // absolute inf-norm
    int max_iter = 50;
    double damping_initial = 1.0;
    double backtrack_ratio = 0.5;
    int max_backtracks = 30;
    double bound_slack = 0.1;  // iterates must stay in [-slack, 1+slack]
    double dt_shrink = 0.5;
    double dt_grow = 2.0;
    // residual level treated as numerical stagnation: if backtracking cannot
    // improve any further but the residual is already below this, accept.
    // Keep <= tol_residual unless a user-tightened tolerance sits below the
    // attainable floor; accepted states are only guaranteed to satisfy
    // max(tol_residual, stagnation_accept).
    double stagnation_accept = 1e-12;
};

struct NewtonResult {
    bool converged = false;
    Eigen::VectorXd x;
    int iterations = 0;
    double residual_norm = 0.0;
    std::string failure_reason;
};

/// Damped Newton-Raphson on a square sparse system. The linear solve is a
/// sparse LU factorization; each solve is verified against the contract
/// ||A x - b|| <= 1e-12 ||b|| (with an absolute floor). Saturation unknowns
/// are kept within [-bound_slack, 1 + bound_slack] during the iteration and
/// must land in [0, 1] exactly at convergence. If roundoff leaves a
/// saturation marginally outside, a bounded number of pinning rounds re-solve
/// with that unknown held at the bound; the full unmodified residual is
/// re-checked afterwards, so the returned state is never clamped.
NewtonResult newton_solve(const NonlinearSystem& system, const Eigen::VectorXd& guess,
                          const NewtonConfig& cfg, LinearCache* cache = nullptr);

/// Max relative error between the analytic Jacobian and central finite
/// differences. Entries whose row or column belongs to a cell that touches a
/// face within `switch_margin` of an upwind/Godunov switch are excluded
/// (upwinding is not differentiable across the switch).
double jacobian_fd_check(const NonlinearSystem& system, const Eigen::VectorXd& x,
                         double epsilon, double switch_margin = 1e-7);

struct StepRecord {
    int step = 0;
    double time = 0.0;
    double dt = 0.0;
    int newton_iterations = 0;
    double residual_norm = 0.0;
    EnergyReport energy;
    double potential_relation_residual = 0.0; // max cell-wise (non-local)
    double normalization_residual = 0.0;      // |sum |K| ov-mu| (non-local)
    double mixed_measure = 0.0;               // sum |K| over cells with 0.1 < c1 < 0.9
    double c1_min = 0.0;                      // saturation extrema of the accepted state
    double c1_max = 0.0;
};

struct Trajectory {
    ModelKind kind = ModelKind::nonlocal;
    std::vector<State> snapshots;     // initial state, requested output times, final state
    std::vector<StepRecord> steps;    // per accepted step, starting with t = 0
};

struct RunOptions {
    double t_end = 0.0;
    double dt0 = 1e-4;
    std::vector<double> output_times; // snapshots at these times (hit exactly)
    NewtonConfig newton;
    std::ostream* log = nullptr;           // one line per accepted step
    bool enforce_energy_decrease = true;   // reject steps raising e_total
    double energy_increase_tol = 1e-9;
    int max_dt_halvings = 20;              // dt_min = dt0 * 2^-20
};

/// Advances the implicit scheme with backward-Euler steps and adaptive dt:
/// failed steps (Newton failure, bound violation, energy increase) halve dt,
/// successful ones grow it back up to dt0. Throws SolverError if dt
/// underflows. Initial potentials are derived from c1 when absent.
Trajectory run(const Mesh& mesh, const ModelParams& params, const State& initial,
               const RunOptions& options);

} // namespace chfv
