#pragma once

#include "chfv/mesh.hpp"

#include <array>
#include <utility>
#include <vector>

namespace chfv {

enum class ModelKind { local, nonlocal };

/// Physical parameters of both phase-field models. alpha is the combined
/// interface coefficient, chi the chemical activity, theta the thermal
/// diffusion pair, mobility the constant phase mobilities. psi1/psi2 are
/// per-cell external potential samples (size = number of cells).
struct ModelParams {
    double alpha = 0.0;
    double chi = 0.0;
    std::array<double, 2> theta{0.0, 0.0};
    std::array<double, 2> mobility{1.0, 1.0};
    std::vector<double> psi1;
    std::vector<double> psi2;
    ModelKind kind = ModelKind::nonlocal;

    void validate(int num_cells) const; // throws ConfigError
};

/// One time level. Non-local states carry both phase potentials; local states
/// store the generalized potential (mu = mu1 - mu2) in `mu1` and leave `mu2`
/// empty. c2 is always derived as 1 - c1.
struct State {
    ModelKind kind = ModelKind::nonlocal;
    double time = 0.0;
    std::vector<double> c1;
    std::vector<double> mu1;
    std::vector<double> mu2;

    int num_cells() const { return static_cast<int>(c1.size()); }
    double c2(int k) const { return 1.0 - c1[static_cast<size_t>(k)]; }
};

struct EnergyReport {
    double e_dir = 0.0;
    double e_chem = 0.0;
    double e_therm = 0.0;
    double e_ext = 0.0;
    double e_total = 0.0;
    std::array<double, 2> entropy{0.0, 0.0}; // sum |K| H(c_i)
    std::array<double, 2> mass{0.0, 0.0};    // sum |K| c_i
    // instantaneous dissipation split, filled for non-local runs only
    double dissipation_total_flux = 0.0;
    double dissipation_exchange = 0.0;
    bool has_dissipation = false;
};

/// eta(c) = m1 m2 c (1-c) / (m1 c + m2 (1-c)); zero at both endpoints.
double eta(double c, double m1, double m2);

/// rho(c) = m1 c / (m1 c + m2 (1-c)); monotone, rho(0)=0, rho(1)=1.
double rho(double c, double m1, double m2);

/// f(c) = theta1 log(c) - theta2 log(1-c). Unregularized: returns +-inf at a
/// degenerate endpoint with positive theta.
double f_log(double c, double theta1, double theta2);

/// Same with the log argument clamped below at eps; used inside iterations
/// where transient iterates may leave [0,1].
double f_log_regularized(double c, double theta1, double theta2, double eps = 1e-12);

/// H(c) = c log c - c + 1 >= 0, extended by continuity with H(0) = 1.
double boltzmann_h(double c);

/// Decomposed discrete energy, entropies and masses of a state.
EnergyReport discrete_energy(const Mesh& mesh, const State& state, const ModelParams& params);

/// Face-wise dissipation split of a non-local state: total-flux part
/// sum_f (J1+J2)^2 / (tau (m1 c1 + m2 c2)) and exchange part
/// sum_f tau m1 c1 m2 c2 / (m1 c1 + m2 c2) (dV1 - dV2)^2, with the upstream
/// face saturations the scheme's advective fluxes use. Both parts >= 0.
std::pair<double, double> half_step_dissipation(const Mesh& mesh, const State& state,
                                                const ModelParams& params);

} // namespace chfv
