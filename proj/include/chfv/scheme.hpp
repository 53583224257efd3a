#pragma once

#include "chfv/mesh.hpp"
#include "chfv/model.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <vector>

namespace chfv {

/// (Delta_h u)_K = (1/|K|) sum_{sigma=K|L} tau_sigma (u_L - u_K),
/// homogeneous Neumann at the boundary (no boundary terms).
std::vector<double> discrete_laplacian(const Mesh& mesh, const std::vector<double>& field);

/// Upstream-mobility flux through one face, oriented K -> L:
///   F = m tau c_up (VK - VL) + m theta tau (cK - cL),
/// with c_up taken from the side of the larger potential and the tie broken
/// towards max(cK, cL).
double upstream_flux(double cK, double cL, double VK, double VL, double tau_sigma,
                     double m, double theta);

/// Godunov flux for the non-monotone mobility eta(.; m1, m2) with face
/// potential drop q = tau (wK - wL):
///   F = min_{c in [cK,cL]} eta(c) q   if cK <= cL,
///   F = max_{c in [cL,cK]} eta(c) q   otherwise.
/// The interval extremum of eta sits at c* = sqrt(m2)/(sqrt(m1)+sqrt(m2)).
double godunov_flux(double cK, double cL, double wK, double wL, double tau_sigma,
                    double m1, double m2);

/// Saturation where eta' vanishes (the single interior maximum of eta).
double eta_argmax(double m1, double m2);

/// All discrete equation values of one backward-Euler step, kept in full
/// (including the redundant conservation row) so that the telescoping and
/// antisymmetry identities stay assertable.
struct Residual {
    // conservation rows per cell: phase 1, then phase 2 (non-local only)
    std::vector<double> conservation1;
    std::vector<double> conservation2;
    // potential-relation row per cell
    std::vector<double> potential;
    // global normalization row sum |K| (c1 mu1 + c2 mu2) (non-local only)
    double normalization = 0.0;
};

Residual assemble_nonlocal(const Mesh& mesh, const State& state_new, const State& state_old,
                           double dt, const ModelParams& params);

Residual assemble_local(const Mesh& mesh, const State& state_new, const State& state_old,
                        double dt, const ModelParams& params);

/// Square nonlinear system F(x) = 0 handed to the Newton solver. Implementors
/// guarantee a fixed sparsity pattern across calls.
class NonlinearSystem {
public:
    virtual ~NonlinearSystem() = default;
    virtual int size() const = 0;
    virtual void residual(const Eigen::VectorXd& x, Eigen::VectorXd& r) const = 0;
    virtual void jacobian(const Eigen::VectorXd& x, Eigen::SparseMatrix<double>& jac) const = 0;
    /// Indices of the saturation unknowns, for bound control in the solver.
    virtual const std::vector<int>& saturation_indices() const = 0;
    /// Row to displace when a saturation unknown is held at `target`: the
    /// conservation row of the phase that vanishes there, which is the row
    /// whose potential couplings are degenerate at the bound.
    virtual int pin_row(int saturation_index, double target) const = 0;
    /// Per-unknown flag: false where the residual is non-differentiable within
    /// `margin` of an upwind or Godunov switch (used by the FD Jacobian check).
    virtual std::vector<bool> smooth_mask(const Eigen::VectorXd& x, double margin) const
    {
        (void)x;
        (void)margin;
        return std::vector<bool>(static_cast<size_t>(size()), true);
    }
};

/// One implicit step of the non-local model. Unknown layout per cell K:
/// x[3K] = c1_K, x[3K+1] = mu1_K, x[3K+2] = mu2_K. Rows follow the same
/// layout with the phase-2 conservation row of cell 0 replaced by the global
/// normalization row: the sum of all conservation rows vanishes identically
/// once c2 = 1 - c1 is eliminated, so that row is redundant and the
/// replacement yields a square nonsingular system without pinning any
/// potential value.
class NonlocalStepSystem : public NonlinearSystem {
public:
    NonlocalStepSystem(const Mesh& mesh, const ModelParams& params, const State& state_old, double dt);

    int size() const override { return 3 * mesh_.num_cells(); }
    void residual(const Eigen::VectorXd& x, Eigen::VectorXd& r) const override;
    void jacobian(const Eigen::VectorXd& x, Eigen::SparseMatrix<double>& jac) const override;
    const std::vector<int>& saturation_indices() const override { return sat_indices_; }
    int pin_row(int saturation_index, double target) const override
    {
        // c1 -> 0: the phase-1 row degenerates; c1 -> 1: the phase-2 row does.
        // Cell 0 has no phase-2 row (normalization lives there), so fall back
        // to its phase-1 row and let the neighbours carry the mu coupling.
        if (target == 0.0 || saturation_index == 0)
            return saturation_index;
        return saturation_index + 1;
    }
    std::vector<bool> smooth_mask(const Eigen::VectorXd& x, double margin) const override;

    Eigen::VectorXd pack(const State& s) const;
    State unpack(const Eigen::VectorXd& x, double time) const;

private:
    const Mesh& mesh_;
    const ModelParams& params_;
    State old_;
    double dt_;
    std::vector<int> sat_indices_;
};

/// One implicit step of the local model. Unknown layout per cell K:
/// x[2K] = c_K, x[2K+1] = mu_K.
class LocalStepSystem : public NonlinearSystem {
public:
    LocalStepSystem(const Mesh& mesh, const ModelParams& params, const State& state_old, double dt);

    int size() const override { return 2 * mesh_.num_cells(); }
    void residual(const Eigen::VectorXd& x, Eigen::VectorXd& r) const override;
    void jacobian(const Eigen::VectorXd& x, Eigen::SparseMatrix<double>& jac) const override;
    const std::vector<int>& saturation_indices() const override { return sat_indices_; }
    int pin_row(int saturation_index, double) const override { return saturation_index; }
    std::vector<bool> smooth_mask(const Eigen::VectorXd& x, double margin) const override;

    Eigen::VectorXd pack(const State& s) const;
    State unpack(const Eigen::VectorXd& x, double time) const;

private:
    const Mesh& mesh_;
    const ModelParams& params_;
    State old_;
    double dt_;
    std::vector<int> sat_indices_;
};

/// Consistent potentials for a freshly constructed saturation field:
/// mu1 = (1-c1) d, mu2 = -c1 d with d = -alpha Delta_h c1 + chi (1 - 2 c1),
/// which satisfies both the potential relation and the normalization.
/// For the local model, mu = d directly.
void initialize_potentials(const Mesh& mesh, const ModelParams& params, State& state);

} // namespace chfv
