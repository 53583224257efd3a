#pragma once

#include "chfv/mesh.hpp"
#include "chfv/model.hpp"
#include "chfv/solver.hpp"

#include <utility>
#include <vector>

namespace chfv {

/// Piecewise-constant nonnegative density on a uniform 1D grid with cell
/// width h and cell centers (k + 1/2) h.
struct Density1D {
    double h = 0.0;
    std::vector<double> values;

    int size() const { return static_cast<int>(values.size()); }
    double mass() const
    {
        double s = 0.0;
        for (double v : values)
            s += v;
        return h * s;
    }
};

/// Exact quadratic-cost Wasserstein distance between equal-mass densities,
/// computed from the piecewise-linear quantile functions:
/// W^2 = (1/m) int_0^mass (Q_a - Q_b)^2 ds. Returns W >= 0.
double wasserstein_1d(const Density1D& a, const Density1D& b, double m);

/// Kantorovich potential data for the pair (a, b): the monotone rearrangement
/// T sending a to b defines phi'(x) = (x - T(x))/m. `dphi` holds exact
/// cell averages of phi', `phi` its cumulative integral normalized to
/// sum h a phi = 0, and `transport_cost` the exact m int a |phi'|^2 dx
/// evaluated in x-space (an independent route to W^2).
struct KantorovichGradient {
    std::vector<double> phi;
    std::vector<double> dphi;
    double transport_cost = 0.0;
};

KantorovichGradient kantorovich_gradient(const Density1D& a, const Density1D& b, double m);

struct JkoOptions {
    double pg_tolerance = 1e-7;
    int max_iterations = 10000;
    double armijo = 1e-4;
    int max_backtracks = 60;
};

struct JkoStepResult {
    Density1D c1;
    Density1D c2;
    bool converged = false;
    int iterations = 0;
    double pg_norm = 0.0;
    double objective = 0.0; // E + (1/2 tau) W^2 at the output
    double energy = 0.0;
    double w_sq = 0.0; // W1^2 + W2^2 between output and prev
};

/// One minimizing-movement step: approximately minimizes
///   E(c) + (1/(2 tau)) [W1^2(c1, prev1) + W2^2(c2, prev2)]
/// over c1 in [0,1]^n with the mass of prev1 fixed and c2 = 1 - c1, by
/// projected gradient descent with backtracking on the objective. The
/// iteration starts from prev, so the JKO inequality
/// E(c^n) + W^2/(2 tau) <= E(c^{n-1}) holds for every accepted step.
JkoStepResult jko_step(const Mesh& mesh1d, const ModelParams& params,
                       const Density1D& prev1, const Density1D& prev2, double tau,
                       const JkoOptions& opts = {});

struct JkoStepInfo {
    double time = 0.0;
    double energy = 0.0;    // E(c^n)
    double w_sq = 0.0;      // W^2(c^n, c^{n-1})
    double objective = 0.0; // E(c^n) + W^2/(2 tau)
    int iterations = 0;
    bool converged = false;
    double pg_norm = 0.0;
};

struct JkoTrajectory {
    double tau = 0.0;
    double h = 0.0;
    std::vector<std::vector<double>> c1; // c1[n] after n steps; c1[0] is the initial datum
    std::vector<JkoStepInfo> steps;      // steps[0] describes the initial state (w_sq = 0)
};

JkoTrajectory jko_run(const Mesh& mesh1d, const ModelParams& params,
                      const Density1D& initial1, double tau, int n_steps,
                      const JkoOptions& opts = {});

/// ||a - b||_{L^2} = sqrt(sum h (a_k - b_k)^2) on a common grid.
double l2_gap(double h, const std::vector<double>& a, const std::vector<double>& b);

/// Per-time L2 gaps between an FV trajectory and a JKO trajectory sampled at
/// the given times; both must live on the same uniform 1D grid and hold
/// states at the requested times.
std::vector<double> compare_trajectories(const Mesh& mesh1d, const Trajectory& fv,
                                         const JkoTrajectory& jko,
                                         const std::vector<double>& times);

} // namespace chfv
