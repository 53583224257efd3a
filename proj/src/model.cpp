#include "chfv/model.hpp"

#include "chfv/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace chfv {

void ModelParams::validate(int num_cells) const
{
    if (!(alpha > 0.0))
        throw ConfigError("alpha must be positive");
    if (!(chi > 0.0))
        throw ConfigError("chi must be positive");
    if (theta[0] < 0.0 || theta[1] < 0.0)
        throw ConfigError("theta must be non-negative");
    if (!(mobility[0] > 0.0) || !(mobility[1] > 0.0))
        throw ConfigError("mobilities must be positive");
    if (kind == ModelKind::local && (theta[0] != 0.0 || theta[1] != 0.0))
        throw ConfigError("the local model carries no thermal term: theta must be (0,0)");
    const size_t n = static_cast<size_t>(num_cells);
    if (psi1.size() != n || psi2.size() != n)
        throw ConfigError("psi fields must have one value per mesh cell");
}

static void check_saturation(double c)
{
    if (!(c >= 0.0 && c <= 1.0))
        throw std::domain_error("saturation outside [0,1]: " + std::to_string(c));
}

double eta(double c, double m1, double m2)
{
    check_saturation(c);
    if (c == 0.0 || c == 1.0)
        return 0.0;
    return m1 * m2 * c * (1.0 - c) / (m1 * c + m2 * (1.0 - c));
}

double rho(double c, double m1, double m2)
{
    check_saturation(c);
    return m1 * c / (m1 * c + m2 * (1.0 - c));
}

double f_log(double c, double theta1, double theta2)
{
    check_saturation(c);
    double v = 0.0;
    if (theta1 != 0.0)
        v += theta1 * std::log(c); // -inf at c=0
    if (theta2 != 0.0)
        v -= theta2 * std::log(1.0 - c); // +inf at c=1
    return v;
}

double f_log_regularized(double c, double theta1, double theta2, double eps)
{
    double v = 0.0;
    if (theta1 != 0.0)
        v += theta1 * std::log(std::max(c, eps));
    if (theta2 != 0.0)
        v -= theta2 * std::log(std::max(1.0 - c, eps));
    return v;
}

double boltzmann_h(double c)
{
    if (c <= 0.0)
        return 1.0;
    return c * std::log(c) - c + 1.0;
}

EnergyReport discrete_energy(const Mesh& mesh, const State& state, const ModelParams& params)
{
    if (state.num_cells() != mesh.num_cells())
        throw std::invalid_argument("discrete_energy: state/mesh size mismatch");
    params.validate(mesh.num_cells());

    EnergyReport r;
    for (int f : mesh.interior_faces()) {
        const Face& face = mesh.face(f);
        const double dc = state.c1[static_cast<size_t>(face.cell_k)] - state.c1[static_cast<size_t>(face.cell_l)];
        r.e_dir += 0.5 * params.alpha * face.tau * dc * dc;
    }
    for (int k = 0; k < mesh.num_cells(); ++k) {
        const double vol = mesh.cell(k).measure;
        const double c1 = state.c1[static_cast<size_t>(k)];
        const double c2 = 1.0 - c1;
        r.e_chem += params.chi * vol * c1 * c2;
        r.entropy[0] += vol * boltzmann_h(c1);
        r.entropy[1] += vol * boltzmann_h(c2);
        r.mass[0] += vol * c1;
        r.mass[1] += vol * c2;
        r.e_ext += vol * (c1 * params.psi1[static_cast<size_t>(k)] + c2 * params.psi2[static_cast<size_t>(k)]);
    }
    r.e_therm = params.theta[0] * r.entropy[0] + params.theta[1] * r.entropy[1];
    r.e_total = r.e_dir + r.e_chem + r.e_therm + r.e_ext;
    return r;
}

std::pair<double, double> half_step_dissipation(const Mesh& mesh, const State& state,
                                                const ModelParams& params)
{
    if (state.kind != ModelKind::nonlocal)
        throw std::invalid_argument("half_step_dissipation requires a non-local state");
    if (state.num_cells() != mesh.num_cells() ||
        state.mu1.size() != state.c1.size() || state.mu2.size() != state.c1.size())
        throw std::invalid_argument("half_step_dissipation: state/mesh size mismatch");
    params.validate(mesh.num_cells());

    const double m1 = params.mobility[0], m2 = params.mobility[1];
    double d_tot = 0.0, d_exch = 0.0;
    for (int f : mesh.interior_faces()) {
        const Face& face = mesh.face(f);
        const size_t k = static_cast<size_t>(face.cell_k), l = static_cast<size_t>(face.cell_l);
        const double dv1 = (state.mu1[k] + params.psi1[k]) - (state.mu1[l] + params.psi1[l]);
        const double dv2 = (state.mu2[k] + params.psi2[k]) - (state.mu2[l] + params.psi2[l]);
        // upstream saturations, matching the advective fluxes of the scheme
        const double c1u = (dv1 > 0.0) ? state.c1[k] : (dv1 < 0.0) ? state.c1[l]
                                                                   : std::max(state.c1[k], state.c1[l]);
        const double c2u = (dv2 > 0.0) ? 1.0 - state.c1[k] : (dv2 < 0.0) ? 1.0 - state.c1[l]
                                                                         : std::max(1.0 - state.c1[k], 1.0 - state.c1[l]);
        const double w1 = m1 * c1u * face.tau;
        const double w2 = m2 * c2u * face.tau;
        const double wsum = w1 + w2;
        if (wsum <= 0.0)
            continue;
        const double jtot = w1 * dv1 + w2 * dv2;
        d_tot += jtot * jtot / wsum;
        d_exch += (w1 * w2 / wsum) * (dv1 - dv2) * (dv1 - dv2);
    }
    return {d_tot, d_exch};
}

} // namespace chfv
