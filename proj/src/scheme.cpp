#include "chfv/scheme.hpp"

#include "chfv/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace chfv {

namespace {

// eta without the [0,1] domain check: Newton iterates may transiently leave
// the box (the solver bounds them to [-0.1, 1.1]); the rational expression
// stays well defined there and vanishes exactly at 0 and 1.
double eta_raw(double c, double m1, double m2)
{
    return m1 * m2 * c * (1.0 - c) / (m1 * c + m2 * (1.0 - c));
}

double eta_raw_deriv(double c, double m1, double m2)
{
    const double den = m1 * c + m2 * (1.0 - c);
    const double num = (1.0 - 2.0 * c) * den - c * (1.0 - c) * (m1 - m2);
    return m1 * m2 * num / (den * den);
}

struct Upwind {
    double c;
    bool from_k;
};

Upwind upwind_choice(double cK, double cL, double dV)
{
    if (dV > 0.0)
        return {cK, true};
    if (dV < 0.0)
        return {cL, false};
    return (cK >= cL) ? Upwind{cK, true} : Upwind{cL, false};
}

enum class GodunovPick { left, right, interior };

struct GodunovEval {
    double value;
    GodunovPick pick;
};

GodunovEval godunov_eval(double cK, double cL, double q, double m1, double m2)
{
    const double cstar = eta_argmax(m1, m2);
    const double lo = std::min(cK, cL), hi = std::max(cK, cL);
    const double eK = eta_raw(cK, m1, m2);
    const double eL = eta_raw(cL, m1, m2);

    GodunovEval best{eK * q, GodunovPick::left};
    const bool minimize = (cK <= cL);
    auto better = [&](double candidate) {
        return minimize ? candidate < best.value : candidate > best.value;
    };
    if (better(eL * q)) {
        best = {eL * q, GodunovPick::right};
    }
    if (lo < cstar && cstar < hi) {
        const double ei = eta_raw(cstar, m1, m2);
        if (better(ei * q))
            best = {ei * q, GodunovPick::interior};
    }
    return best;
}

} // namespace

double eta_argmax(double m1, double m2)
{
    return std::sqrt(m2) / (std::sqrt(m1) + std::sqrt(m2));
}

std::vector<double> discrete_laplacian(const Mesh& mesh, const std::vector<double>& field)
{
    if (static_cast<int>(field.size()) != mesh.num_cells())
        throw std::invalid_argument("discrete_laplacian: field/mesh size mismatch");
    std::vector<double> lap(field.size(), 0.0);
    for (int f : mesh.interior_faces()) {
        const Face& face = mesh.face(f);
        const size_t k = static_cast<size_t>(face.cell_k), l = static_cast<size_t>(face.cell_l);
        const double flux = face.tau * (field[l] - field[k]);
        lap[k] += flux;
        lap[l] -= flux;
    }
    for (int k = 0; k < mesh.num_cells(); ++k)
        lap[static_cast<size_t>(k)] /= mesh.cell(k).measure;
    return lap;
}

double upstream_flux(double cK, double cL, double VK, double VL, double tau_sigma,
                     double m, double theta)
{
    const Upwind up = upwind_choice(cK, cL, VK - VL);
    return m * tau_sigma * up.c * (VK - VL) + m * theta * tau_sigma * (cK - cL);
}

double godunov_flux(double cK, double cL, double wK, double wL, double tau_sigma,
                    double m1, double m2)
{
    const double q = tau_sigma * (wK - wL);
    return godunov_eval(cK, cL, q, m1, m2).value;
}

// ---------------------------------------------------------------------------
// non-local model
// ---------------------------------------------------------------------------

namespace {

struct NonlocalArrays {
    std::vector<double> cons1, cons2, pot;
    double normalization = 0.0;
};

// Evaluates all equations of one backward-Euler step of the non-local model
// at the state (c1, mu1, mu2) given by accessors.
template <typename C1, typename Mu1, typename Mu2>
NonlocalArrays nonlocal_equations(const Mesh& mesh, const ModelParams& params,
                                  const State& old, double dt,
                                  C1&& c1, Mu1&& mu1, Mu2&& mu2)
{
    const int n = mesh.num_cells();
    NonlocalArrays r;
    r.cons1.assign(static_cast<size_t>(n), 0.0);
    r.cons2.assign(static_cast<size_t>(n), 0.0);
    r.pot.assign(static_cast<size_t>(n), 0.0);

    const double m1 = params.mobility[0], m2 = params.mobility[1];
    const double th1 = params.theta[0], th2 = params.theta[1];

    for (int k = 0; k < n; ++k) {
        const double vol = mesh.cell(k).measure;
        r.cons1[static_cast<size_t>(k)] = vol * (c1(k) - old.c1[static_cast<size_t>(k)]);
        r.cons2[static_cast<size_t>(k)] = vol * ((1.0 - c1(k)) - (1.0 - old.c1[static_cast<size_t>(k)]));
        r.pot[static_cast<size_t>(k)] = mu1(k) - mu2(k) - params.chi * (1.0 - 2.0 * c1(k));
        r.normalization += vol * (c1(k) * mu1(k) + (1.0 - c1(k)) * mu2(k));
    }
    for (int f : mesh.interior_faces()) {
        const Face& face = mesh.face(f);
        const int kk = face.cell_k, ll = face.cell_l;
        const double tau = face.tau;
        // alpha Delta_h c1 contribution of this face to both potential rows
        const double grad = tau * (c1(ll) - c1(kk));
        r.pot[static_cast<size_t>(kk)] += params.alpha * grad / mesh.cell(kk).measure;
        r.pot[static_cast<size_t>(ll)] -= params.alpha * grad / mesh.cell(ll).measure;

        const double v1k = mu1(kk) + params.psi1[static_cast<size_t>(kk)];
        const double v1l = mu1(ll) + params.psi1[static_cast<size_t>(ll)];
        const double v2k = mu2(kk) + params.psi2[static_cast<size_t>(kk)];
        const double v2l = mu2(ll) + params.psi2[static_cast<size_t>(ll)];
        const double f1 = upstream_flux(c1(kk), c1(ll), v1k, v1l, tau, m1, th1);
        const double f2 = upstream_flux(1.0 - c1(kk), 1.0 - c1(ll), v2k, v2l, tau, m2, th2);
        r.cons1[static_cast<size_t>(kk)] += dt * f1;
        r.cons1[static_cast<size_t>(ll)] -= dt * f1;
        r.cons2[static_cast<size_t>(kk)] += dt * f2;
        r.cons2[static_cast<size_t>(ll)] -= dt * f2;
    }
    return r;
}

} // namespace

Residual assemble_nonlocal(const Mesh& mesh, const State& state_new, const State& state_old,
                           double dt, const ModelParams& params)
{
    if (params.kind != ModelKind::nonlocal || state_new.kind != ModelKind::nonlocal ||
        state_old.kind != ModelKind::nonlocal)
        throw std::invalid_argument("assemble_nonlocal: model kind mismatch");
    const size_t n = static_cast<size_t>(mesh.num_cells());
    if (state_new.c1.size() != n || state_new.mu1.size() != n || state_new.mu2.size() != n ||
        state_old.c1.size() != n)
        throw std::invalid_argument("assemble_nonlocal: state/mesh size mismatch");
    if (!(dt > 0.0))
        throw std::invalid_argument("assemble_nonlocal: dt must be positive");
    params.validate(mesh.num_cells());

    auto arrays = nonlocal_equations(
        mesh, params, state_old, dt,
        [&](int k) { return state_new.c1[static_cast<size_t>(k)]; },
        [&](int k) { return state_new.mu1[static_cast<size_t>(k)]; },
        [&](int k) { return state_new.mu2[static_cast<size_t>(k)]; });

    Residual r;
    r.conservation1 = std::move(arrays.cons1);
    r.conservation2 = std::move(arrays.cons2);
    r.potential = std::move(arrays.pot);
    r.normalization = arrays.normalization;
    return r;
}

NonlocalStepSystem::NonlocalStepSystem(const Mesh& mesh, const ModelParams& params,
                                       const State& state_old, double dt)
    : mesh_(mesh), params_(params), old_(state_old), dt_(dt)
{
    if (params_.kind != ModelKind::nonlocal || old_.kind != ModelKind::nonlocal)
        throw std::invalid_argument("NonlocalStepSystem: model kind mismatch");
    params_.validate(mesh.num_cells());
    sat_indices_.reserve(static_cast<size_t>(mesh.num_cells()));
    for (int k = 0; k < mesh.num_cells(); ++k)
        sat_indices_.push_back(3 * k);
}

Eigen::VectorXd NonlocalStepSystem::pack(const State& s) const
{
    Eigen::VectorXd x(size());
    for (int k = 0; k < mesh_.num_cells(); ++k) {
        x[3 * k] = s.c1[static_cast<size_t>(k)];
        x[3 * k + 1] = s.mu1[static_cast<size_t>(k)];
        x[3 * k + 2] = s.mu2[static_cast<size_t>(k)];
    }
    return x;
}

State NonlocalStepSystem::unpack(const Eigen::VectorXd& x, double time) const
{
    State s;
    s.kind = ModelKind::nonlocal;
    s.time = time;
    const size_t n = static_cast<size_t>(mesh_.num_cells());
    s.c1.resize(n);
    s.mu1.resize(n);
    s.mu2.resize(n);
    for (int k = 0; k < mesh_.num_cells(); ++k) {
        s.c1[static_cast<size_t>(k)] = x[3 * k];
        s.mu1[static_cast<size_t>(k)] = x[3 * k + 1];
        s.mu2[static_cast<size_t>(k)] = x[3 * k + 2];
    }
    return s;
}

void NonlocalStepSystem::residual(const Eigen::VectorXd& x, Eigen::VectorXd& r) const
{
    auto arrays = nonlocal_equations(
        mesh_, params_, old_, dt_,
        [&](int k) { return x[3 * k]; },
        [&](int k) { return x[3 * k + 1]; },
        [&](int k) { return x[3 * k + 2]; });

    r.resize(size());
    for (int k = 0; k < mesh_.num_cells(); ++k) {
        r[3 * k] = arrays.cons1[static_cast<size_t>(k)];
        r[3 * k + 1] = (k == 0) ? arrays.normalization : arrays.cons2[static_cast<size_t>(k)];
        r[3 * k + 2] = arrays.pot[static_cast<size_t>(k)];
    }
}

std::vector<bool> NonlocalStepSystem::smooth_mask(const Eigen::VectorXd& x, double margin) const
{
    std::vector<bool> mask(static_cast<size_t>(size()), true);
    for (int f : mesh_.interior_faces()) {
        const Face& face = mesh_.face(f);
        const int kk = face.cell_k, ll = face.cell_l;
        const double dv1 = (x[3 * kk + 1] + params_.psi1[static_cast<size_t>(kk)]) -
                           (x[3 * ll + 1] + params_.psi1[static_cast<size_t>(ll)]);
        const double dv2 = (x[3 * kk + 2] + params_.psi2[static_cast<size_t>(kk)]) -
                           (x[3 * ll + 2] + params_.psi2[static_cast<size_t>(ll)]);
        if (std::abs(dv1) < margin || std::abs(dv2) < margin)
            for (int c : {kk, ll})
                for (int j = 0; j < 3; ++j)
                    mask[static_cast<size_t>(3 * c + j)] = false;
    }
    return mask;
}

void NonlocalStepSystem::jacobian(const Eigen::VectorXd& x, Eigen::SparseMatrix<double>& jac) const
{
    const int n = mesh_.num_cells();
    const double m1 = params_.mobility[0], m2 = params_.mobility[1];
    const double th1 = params_.theta[0], th2 = params_.theta[1];

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(12 * n + 16 * static_cast<int>(mesh_.interior_faces().size())));

    auto row2 = [](int k) { return 3 * k + 1; }; // k=0 is the normalization row
    auto add = [&](int r, int c, double v) { trip.emplace_back(r, c, v); };

    for (int k = 0; k < n; ++k) {
        const double vol = mesh_.cell(k).measure;
        // phase-1 conservation: accumulation term
        add(3 * k, 3 * k, vol);
        // phase-2 conservation (or normalization for k = 0)
        if (k == 0) {
            // normalization row entries for every cell appear below
        } else {
            add(row2(k), 3 * k, -vol);
        }
        // potential relation
        add(3 * k + 2, 3 * k + 1, 1.0);
        add(3 * k + 2, 3 * k + 2, -1.0);
        add(3 * k + 2, 3 * k, 2.0 * params_.chi);
        // normalization row: d/dc1 = |K|(mu1-mu2), d/dmu1 = |K| c1, d/dmu2 = |K| c2
        add(1, 3 * k, vol * (x[3 * k + 1] - x[3 * k + 2]));
        add(1, 3 * k + 1, vol * x[3 * k]);
        add(1, 3 * k + 2, vol * (1.0 - x[3 * k]));
    }

    for (int f : mesh_.interior_faces()) {
        const Face& face = mesh_.face(f);
        const int kk = face.cell_k, ll = face.cell_l;
        const double tau = face.tau;
        const double volk = mesh_.cell(kk).measure, voll = mesh_.cell(ll).measure;

        // alpha Delta_h c1 in the potential rows
        add(3 * kk + 2, 3 * ll, params_.alpha * tau / volk);
        add(3 * kk + 2, 3 * kk, -params_.alpha * tau / volk);
        add(3 * ll + 2, 3 * kk, params_.alpha * tau / voll);
        add(3 * ll + 2, 3 * ll, -params_.alpha * tau / voll);

        const double c1k = x[3 * kk], c1l = x[3 * ll];
        const double v1k = x[3 * kk + 1] + params_.psi1[static_cast<size_t>(kk)];
        const double v1l = x[3 * ll + 1] + params_.psi1[static_cast<size_t>(ll)];
        const double v2k = x[3 * kk + 2] + params_.psi2[static_cast<size_t>(kk)];
        const double v2l = x[3 * ll + 2] + params_.psi2[static_cast<size_t>(ll)];

        // phase 1: F1 = m1 tau c_up (v1k - v1l) + m1 th1 tau (c1k - c1l)
        {
            const double dv = v1k - v1l;
            const Upwind up = upwind_choice(c1k, c1l, dv);
            const double dF_dmuk = m1 * tau * up.c;
            const double dF_dck = m1 * tau * dv * (up.from_k ? 1.0 : 0.0) + m1 * th1 * tau;
            const double dF_dcl = m1 * tau * dv * (up.from_k ? 0.0 : 1.0) - m1 * th1 * tau;
            add(3 * kk, 3 * kk + 1, dt_ * dF_dmuk);
            add(3 * kk, 3 * ll + 1, -dt_ * dF_dmuk);
            add(3 * kk, 3 * kk, dt_ * dF_dck);
            add(3 * kk, 3 * ll, dt_ * dF_dcl);
            add(3 * ll, 3 * kk + 1, -dt_ * dF_dmuk);
            add(3 * ll, 3 * ll + 1, dt_ * dF_dmuk);
            add(3 * ll, 3 * kk, -dt_ * dF_dck);
            add(3 * ll, 3 * ll, -dt_ * dF_dcl);
        }
        // phase 2 with c2 = 1 - c1
        {
            const double dv = v2k - v2l;
            const Upwind up = upwind_choice(1.0 - c1k, 1.0 - c1l, dv);
            const double dF_dmuk = m2 * tau * up.c;
            // derivative w.r.t. c1 picks up the chain factor -1
            const double dF_dck = -(m2 * tau * dv * (up.from_k ? 1.0 : 0.0) + m2 * th2 * tau);
            const double dF_dcl = -(m2 * tau * dv * (up.from_k ? 0.0 : 1.0) - m2 * th2 * tau);
            if (kk != 0) {
                add(row2(kk), 3 * kk + 2, dt_ * dF_dmuk);
                add(row2(kk), 3 * ll + 2, -dt_ * dF_dmuk);
                add(row2(kk), 3 * kk, dt_ * dF_dck);
                add(row2(kk), 3 * ll, dt_ * dF_dcl);
            }
            if (ll != 0) {
                add(row2(ll), 3 * kk + 2, -dt_ * dF_dmuk);
                add(row2(ll), 3 * ll + 2, dt_ * dF_dmuk);
                add(row2(ll), 3 * kk, -dt_ * dF_dck);
                add(row2(ll), 3 * ll, -dt_ * dF_dcl);
            }
        }
    }

    jac.resize(size(), size());
    jac.setFromTriplets(trip.begin(), trip.end());
}

// ---------------------------------------------------------------------------
// local model
// ---------------------------------------------------------------------------

namespace {

template <typename C, typename Mu>
std::pair<std::vector<double>, std::vector<double>>
local_equations(const Mesh& mesh, const ModelParams& params, const State& old, double dt,
                C&& c, Mu&& mu)
{
    const int n = mesh.num_cells();
    std::vector<double> cons(static_cast<size_t>(n), 0.0), pot(static_cast<size_t>(n), 0.0);
    const double m1 = params.mobility[0], m2 = params.mobility[1];

    for (int k = 0; k < n; ++k) {
        const double vol = mesh.cell(k).measure;
        cons[static_cast<size_t>(k)] = vol * (c(k) - old.c1[static_cast<size_t>(k)]);
        pot[static_cast<size_t>(k)] = mu(k) - params.chi * (1.0 - 2.0 * c(k));
    }
    for (int f : mesh.interior_faces()) {
        const Face& face = mesh.face(f);
        const int kk = face.cell_k, ll = face.cell_l;
        const double tau = face.tau;
        const double grad = tau * (c(ll) - c(kk));
        pot[static_cast<size_t>(kk)] += params.alpha * grad / mesh.cell(kk).measure;
        pot[static_cast<size_t>(ll)] -= params.alpha * grad / mesh.cell(ll).measure;

        const double wk = mu(kk) + params.psi1[static_cast<size_t>(kk)] - params.psi2[static_cast<size_t>(kk)];
        const double wl = mu(ll) + params.psi1[static_cast<size_t>(ll)] - params.psi2[static_cast<size_t>(ll)];
        const double g = godunov_flux(c(kk), c(ll), wk, wl, tau, m1, m2);
        cons[static_cast<size_t>(kk)] += dt * g;
        cons[static_cast<size_t>(ll)] -= dt * g;
    }
    return {std::move(cons), std::move(pot)};
}

} // namespace

Residual assemble_local(const Mesh& mesh, const State& state_new, const State& state_old,
                        double dt, const ModelParams& params)
{
    if (params.kind != ModelKind::local || state_new.kind != ModelKind::local ||
        state_old.kind != ModelKind::local)
        throw std::invalid_argument("assemble_local: model kind mismatch");
    const size_t n = static_cast<size_t>(mesh.num_cells());
    if (state_new.c1.size() != n || state_new.mu1.size() != n || state_old.c1.size() != n)
        throw std::invalid_argument("assemble_local: state/mesh size mismatch");
    if (!(dt > 0.0))
        throw std::invalid_argument("assemble_local: dt must be positive");
    params.validate(mesh.num_cells());

    auto [cons, pot] = local_equations(
        mesh, params, state_old, dt,
        [&](int k) { return state_new.c1[static_cast<size_t>(k)]; },
        [&](int k) { return state_new.mu1[static_cast<size_t>(k)]; });

    Residual r;
    r.conservation1 = std::move(cons);
    r.potential = std::move(pot);
    return r;
}

LocalStepSystem::LocalStepSystem(const Mesh& mesh, const ModelParams& params,
                                 const State& state_old, double dt)
    : mesh_(mesh), params_(params), old_(state_old), dt_(dt)
{
    if (params_.kind != ModelKind::local || old_.kind != ModelKind::local)
        throw std::invalid_argument("LocalStepSystem: model kind mismatch");
    params_.validate(mesh.num_cells());
    sat_indices_.reserve(static_cast<size_t>(mesh.num_cells()));
    for (int k = 0; k < mesh.num_cells(); ++k)
        sat_indices_.push_back(2 * k);
}

Eigen::VectorXd LocalStepSystem::pack(const State& s) const
{
    Eigen::VectorXd x(size());
    for (int k = 0; k < mesh_.num_cells(); ++k) {
        x[2 * k] = s.c1[static_cast<size_t>(k)];
        x[2 * k + 1] = s.mu1[static_cast<size_t>(k)];
    }
    return x;
}

State LocalStepSystem::unpack(const Eigen::VectorXd& x, double time) const
{
    State s;
    s.kind = ModelKind::local;
    s.time = time;
    const size_t n = static_cast<size_t>(mesh_.num_cells());
    s.c1.resize(n);
    s.mu1.resize(n);
    for (int k = 0; k < mesh_.num_cells(); ++k) {
        s.c1[static_cast<size_t>(k)] = x[2 * k];
        s.mu1[static_cast<size_t>(k)] = x[2 * k + 1];
    }
    return s;
}

void LocalStepSystem::residual(const Eigen::VectorXd& x, Eigen::VectorXd& r) const
{
    auto [cons, pot] = local_equations(
        mesh_, params_, old_, dt_,
        [&](int k) { return x[2 * k]; },
        [&](int k) { return x[2 * k + 1]; });
    r.resize(size());
    for (int k = 0; k < mesh_.num_cells(); ++k) {
        r[2 * k] = cons[static_cast<size_t>(k)];
        r[2 * k + 1] = pot[static_cast<size_t>(k)];
    }
}

std::vector<bool> LocalStepSystem::smooth_mask(const Eigen::VectorXd& x, double margin) const
{
    std::vector<bool> mask(static_cast<size_t>(size()), true);
    const double m1 = params_.mobility[0], m2 = params_.mobility[1];
    const double cstar = eta_argmax(m1, m2);
    for (int f : mesh_.interior_faces()) {
        const Face& face = mesh_.face(f);
        const int kk = face.cell_k, ll = face.cell_l;
        const double ck = x[2 * kk], cl = x[2 * ll];
        const double wk = x[2 * kk + 1] + params_.psi1[static_cast<size_t>(kk)] - params_.psi2[static_cast<size_t>(kk)];
        const double wl = x[2 * ll + 1] + params_.psi1[static_cast<size_t>(ll)] - params_.psi2[static_cast<size_t>(ll)];
        const double q = face.tau * (wk - wl);
        // switches of the Godunov selection: sign change of q, interval
        // collapse, candidate ties, or the interior extremum entering/leaving
        bool near = std::abs(q) < margin || std::abs(ck - cl) < margin ||
                    std::abs(ck - cstar) < margin || std::abs(cl - cstar) < margin;
        if (!near) {
            const double ek = eta_raw(ck, m1, m2), el = eta_raw(cl, m1, m2);
            if (std::abs(ek - el) * std::abs(q) < margin)
                near = true;
        }
        if (near)
            for (int c : {kk, ll})
                for (int j = 0; j < 2; ++j)
                    mask[static_cast<size_t>(2 * c + j)] = false;
    }
    return mask;
}

void LocalStepSystem::jacobian(const Eigen::VectorXd& x, Eigen::SparseMatrix<double>& jac) const
{
    const int n = mesh_.num_cells();
    const double m1 = params_.mobility[0], m2 = params_.mobility[1];
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(4 * n + 12 * static_cast<int>(mesh_.interior_faces().size())));
    auto add = [&](int r, int c, double v) { trip.emplace_back(r, c, v); };

    for (int k = 0; k < n; ++k) {
        add(2 * k, 2 * k, mesh_.cell(k).measure);
        add(2 * k + 1, 2 * k + 1, 1.0);
        add(2 * k + 1, 2 * k, 2.0 * params_.chi);
    }

    for (int f : mesh_.interior_faces()) {
        const Face& face = mesh_.face(f);
        const int kk = face.cell_k, ll = face.cell_l;
        const double tau = face.tau;
        const double volk = mesh_.cell(kk).measure, voll = mesh_.cell(ll).measure;

        add(2 * kk + 1, 2 * ll, params_.alpha * tau / volk);
        add(2 * kk + 1, 2 * kk, -params_.alpha * tau / volk);
        add(2 * ll + 1, 2 * kk, params_.alpha * tau / voll);
        add(2 * ll + 1, 2 * ll, -params_.alpha * tau / voll);

        const double ck = x[2 * kk], cl = x[2 * ll];
        const double wk = x[2 * kk + 1] + params_.psi1[static_cast<size_t>(kk)] - params_.psi2[static_cast<size_t>(kk)];
        const double wl = x[2 * ll + 1] + params_.psi1[static_cast<size_t>(ll)] - params_.psi2[static_cast<size_t>(ll)];
        const double q = tau * (wk - wl);
        const GodunovEval g = godunov_eval(ck, cl, q, m1, m2);

        double eta_hat, dG_dck = 0.0, dG_dcl = 0.0;
        switch (g.pick) {
        case GodunovPick::left:
            eta_hat = eta_raw(ck, m1, m2);
            dG_dck = q * eta_raw_deriv(ck, m1, m2);
            break;
        case GodunovPick::right:
            eta_hat = eta_raw(cl, m1, m2);
            dG_dcl = q * eta_raw_deriv(cl, m1, m2);
            break;
        case GodunovPick::interior:
        default:
            eta_hat = eta_raw(eta_argmax(m1, m2), m1, m2); // eta' = 0 there
            break;
        }
        const double dG_dmuk = tau * eta_hat;

        add(2 * kk, 2 * kk + 1, dt_ * dG_dmuk);
        add(2 * kk, 2 * ll + 1, -dt_ * dG_dmuk);
        add(2 * kk, 2 * kk, dt_ * dG_dck);
        add(2 * kk, 2 * ll, dt_ * dG_dcl);
        add(2 * ll, 2 * kk + 1, -dt_ * dG_dmuk);
        add(2 * ll, 2 * ll + 1, dt_ * dG_dmuk);
        add(2 * ll, 2 * kk, -dt_ * dG_dck);
        add(2 * ll, 2 * ll, -dt_ * dG_dcl);
    }

    jac.resize(size(), size());
    jac.setFromTriplets(trip.begin(), trip.end());
}

void initialize_potentials(const Mesh& mesh, const ModelParams& params, State& state)
{
    const auto lap = discrete_laplacian(mesh, state.c1);
    const size_t n = state.c1.size();
    if (state.kind == ModelKind::nonlocal) {
        state.mu1.resize(n);
        state.mu2.resize(n);
        for (size_t k = 0; k < n; ++k) {
            const double d = -params.alpha * lap[k] + params.chi * (1.0 - 2.0 * state.c1[k]);
            // mu1 - mu2 = d and c1 mu1 + c2 mu2 = 0 hold cell-wise
            state.mu1[k] = (1.0 - state.c1[k]) * d;
            state.mu2[k] = -state.c1[k] * d;
        }
    } else {
        state.mu1.resize(n);
        state.mu2.clear();
        for (size_t k = 0; k < n; ++k)
            state.mu1[k] = -params.alpha * lap[k] + params.chi * (1.0 - 2.0 * state.c1[k]);
    }
}

} // namespace chfv
