#include "chfv/jko1d.hpp"

#include "chfv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chfv {

namespace {

std::vector<double> cumulative(const Density1D& d)
{
    std::vector<double> cum(d.values.size() + 1, 0.0);
    for (size_t k = 0; k < d.values.size(); ++k)
        cum[k + 1] = cum[k] + d.h * d.values[k];
    return cum;
}

// Quantile of a piecewise-constant density inside cell k.
double quantile_in_cell(const Density1D& d, const std::vector<double>& cum, int k, double s)
{
    const double a = d.values[static_cast<size_t>(k)];
    const double local = (a > 0.0) ? (s - cum[static_cast<size_t>(k)]) / a : 0.0;
    return k * d.h + std::clamp(local, 0.0, d.h);
}

// Left-continuous quantile: on plateaus of the cumulative mass (zero-density
// stretches) the value is the right edge of the support below, which is the
// monotone-rearrangement convention the Kantorovich potentials need.
double quantile_at(const Density1D& d, const std::vector<double>& cum, double s)
{
    s = std::clamp(s, 0.0, cum.back());
    int k = static_cast<int>(std::distance(cum.begin(), std::lower_bound(cum.begin(), cum.end(), s))) - 1;
    if (k < 0) {
        k = 0;
        while (k < d.size() - 1 && d.values[static_cast<size_t>(k)] == 0.0)
            ++k;
    }
    k = std::min(k, d.size() - 1);
    return quantile_in_cell(d, cum, k, s);
}

void check_pair(const Density1D& a, const Density1D& b)
{
    if (a.size() != b.size() || a.size() == 0)
        throw std::invalid_argument("densities must share one non-empty grid");
    if (std::abs(a.h - b.h) > 1e-14 * std::max(1.0, a.h))
        throw std::invalid_argument("densities must share the cell width");
    for (double v : a.values)
        if (v < 0.0)
            throw std::invalid_argument("density values must be non-negative");
    for (double v : b.values)
        if (v < 0.0)
            throw std::invalid_argument("density values must be non-negative");
    const double ma = a.mass(), mb = b.mass();
    if (!(ma > 0.0))
        throw std::invalid_argument("densities must carry positive mass");
    if (std::abs(ma - mb) > 1e-10 * std::max(1.0, ma))
        throw std::invalid_argument("mass mismatch between densities");
}

// Walks the merged breakpoints of both quantile functions; on every segment
// of positive mass both quantiles are affine, so the visitor receives exact
// endpoint values (s0, s1, a-cell index, Qa at both ends, Qb at both ends).
template <typename Visitor>
void walk_quantiles(const Density1D& a, const Density1D& b, Visitor&& visit)
{
    const auto ca = cumulative(a);
    const auto cb = cumulative(b);
    const double mass = std::min(ca.back(), cb.back());
    if (!(mass > 0.0))
        return;

    int ia = 0, ib = 0;
    const int na = a.size(), nb = b.size();
    double s = 0.0;
    const double tiny = 1e-15 * std::max(1.0, mass);
    while (s < mass - tiny) {
        while (ia < na - 1 && ca[static_cast<size_t>(ia) + 1] <= s + tiny)
            ++ia;
        while (ib < nb - 1 && cb[static_cast<size_t>(ib) + 1] <= s + tiny)
            ++ib;
        double next = std::min({ca[static_cast<size_t>(ia) + 1], cb[static_cast<size_t>(ib) + 1], mass});
        if (next <= s + tiny) {
            s = next;
            continue;
        }
        const double qa0 = quantile_in_cell(a, ca, ia, s);
        const double qa1 = quantile_in_cell(a, ca, ia, next);
        const double qb0 = quantile_in_cell(b, cb, ib, s);
        const double qb1 = quantile_in_cell(b, cb, ib, next);
        visit(s, next, ia, qa0, qa1, qb0, qb1);
        s = next;
    }
}

} // namespace

double wasserstein_1d(const Density1D& a, const Density1D& b, double m)
{
    check_pair(a, b);
    if (!(m > 0.0))
        throw std::invalid_argument("mobility must be positive");
    double total = 0.0;
    walk_quantiles(a, b, [&](double s0, double s1, int, double qa0, double qa1, double qb0, double qb1) {
        const double d0 = qa0 - qb0, d1 = qa1 - qb1;
        total += (s1 - s0) / 3.0 * (d0 * d0 + d0 * d1 + d1 * d1); // exact for affine differences
    });
    return std::sqrt(std::max(0.0, total / m));
}

namespace {

KantorovichGradient kantorovich_gradient_impl(const Density1D& a, const Density1D& b, double m)
{
    const size_t n = static_cast<size_t>(a.size());
    std::vector<double> int1(n, 0.0), int2(n, 0.0);
    walk_quantiles(a, b, [&](double s0, double s1, int cell, double qa0, double qa1, double qb0, double qb1) {
        const double d0 = qa0 - qb0, d1 = qa1 - qb1;
        int1[static_cast<size_t>(cell)] += 0.5 * (s1 - s0) * (d0 + d1);
        int2[static_cast<size_t>(cell)] += (s1 - s0) / 3.0 * (d0 * d0 + d0 * d1 + d1 * d1);
    });

    KantorovichGradient out;
    out.dphi.assign(n, 0.0);
    const auto ca = cumulative(a);
    const auto cb = cumulative(b);
    for (size_t k = 0; k < n; ++k) {
        const double ak = a.values[k];
        if (ak > 0.0) {
            out.dphi[k] = int1[k] / (a.h * ak * m);
        } else {
            // zero-density cell: the rearrangement is constant there
            const double xk = (static_cast<double>(k) + 0.5) * a.h;
            out.dphi[k] = (xk - quantile_at(b, cb, ca[k])) / m;
        }
        out.transport_cost += int2[k];
    }
    out.transport_cost /= m;

    out.phi.assign(n, 0.0);
    for (size_t k = 1; k < n; ++k)
        out.phi[k] = out.phi[k - 1] + 0.5 * a.h * (out.dphi[k - 1] + out.dphi[k]);
    double wsum = 0.0, msum = 0.0;
    for (size_t k = 0; k < n; ++k) {
        wsum += a.h * a.values[k] * out.phi[k];
        msum += a.h * a.values[k];
    }
    const double shift = wsum / msum;
    for (double& p : out.phi)
        p -= shift;
    return out;
}

} // namespace

KantorovichGradient kantorovich_gradient(const Density1D& a, const Density1D& b, double m)
{
    check_pair(a, b);
    if (!(m > 0.0))
        throw std::invalid_argument("mobility must be positive");
    return kantorovich_gradient_impl(a, b, m);
}

namespace {

// Dykstra alternating projection onto {0 <= c <= 1} cap {sum c = target},
// followed by an exact repair pass so the box holds exactly and the mass to
// roundoff.
void project_box_mass(std::vector<double>& x, double target_sum)
{
    const size_t n = x.size();
    std::vector<double> p(n, 0.0);
    double q_corr = 0.0; // hyperplane correction is a uniform shift
    std::vector<double> y(n);
    for (int round = 0; round < 500; ++round) {
        double change = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const double v = x[i] + p[i];
            y[i] = std::clamp(v, 0.0, 1.0);
            p[i] = v - y[i];
        }
        double s = 0.0;
        for (size_t i = 0; i < n; ++i)
            s += y[i] + q_corr;
        const double shift = (target_sum - s) / static_cast<double>(n);
        for (size_t i = 0; i < n; ++i) {
            const double v = y[i] + q_corr + shift;
            change = std::max(change, std::abs(v - x[i]));
            x[i] = v;
        }
        q_corr = -shift;
        if (change < 1e-13)
            break;
    }
    // exact box, mass repaired over interior cells
    for (int pass = 0; pass < 4; ++pass) {
        double s = 0.0;
        for (size_t i = 0; i < n; ++i) {
            x[i] = std::clamp(x[i], 0.0, 1.0);
            s += x[i];
        }
        const double deficit = target_sum - s;
        if (std::abs(deficit) < 1e-15 * std::max(1.0, std::abs(target_sum)))
            break;
        size_t interior = 0;
        for (size_t i = 0; i < n; ++i)
            if (x[i] > 0.0 && x[i] < 1.0)
                ++interior;
        if (interior == 0)
            break;
        const double shift = deficit / static_cast<double>(interior);
        for (size_t i = 0; i < n; ++i)
            if (x[i] > 0.0 && x[i] < 1.0)
                x[i] += shift;
    }
}

double uniform_h(const Mesh& mesh1d)
{
    if (mesh1d.dim() != 1)
        throw std::invalid_argument("jko1d requires a 1D mesh");
    const double h = mesh1d.cell(0).measure;
    for (int k = 1; k < mesh1d.num_cells(); ++k)
        if (std::abs(mesh1d.cell(k).measure - h) > 1e-13 * h)
            throw std::invalid_argument("jko1d requires a uniform grid");
    return h;
}

} // namespace

JkoStepResult jko_step(const Mesh& mesh1d, const ModelParams& params,
                       const Density1D& prev1, const Density1D& prev2, double tau,
                       const JkoOptions& opts)
{
    const double h = uniform_h(mesh1d);
    const int n = mesh1d.num_cells();
    if (prev1.size() != n || prev2.size() != n)
        throw std::invalid_argument("jko_step: density/mesh size mismatch");
    if (!(tau > 0.0))
        throw std::invalid_argument("jko_step: tau must be positive");
    for (int k = 0; k < n; ++k)
        if (std::abs(prev1.values[static_cast<size_t>(k)] + prev2.values[static_cast<size_t>(k)] - 1.0) > 1e-12)
            throw std::invalid_argument("jko_step: paired densities must satisfy c1 + c2 = 1");
    params.validate(n);

    const double m1 = params.mobility[0], m2 = params.mobility[1];
    const double target_sum = [&] {
        double s = 0.0;
        for (double v : prev1.values)
            s += v;
        return s;
    }();

    State st;
    st.kind = params.kind;
    st.c1 = prev1.values;
    auto energy_of = [&](const std::vector<double>& c) {
        st.c1 = c;
        return discrete_energy(mesh1d, st, params).e_total;
    };
    auto wsq_of = [&](const std::vector<double>& c) {
        Density1D d1{h, c};
        std::vector<double> c2(c.size());
        for (size_t i = 0; i < c.size(); ++i)
            c2[i] = 1.0 - c[i];
        Density1D d2{h, std::move(c2)};
        const double w1 = wasserstein_1d(d1, prev1, m1);
        const double w2 = wasserstein_1d(d2, prev2, m2);
        return w1 * w1 + w2 * w2;
    };
    auto objective_of = [&](const std::vector<double>& c) {
        return energy_of(c) + wsq_of(c) / (2.0 * tau);
    };

    auto gradient_of = [&](const std::vector<double>& c, std::vector<double>& g) {
        g.assign(c.size(), 0.0);
        Density1D d1{h, c};
        std::vector<double> c2(c.size());
        for (size_t i = 0; i < c.size(); ++i)
            c2[i] = 1.0 - c[i];
        Density1D d2{h, std::move(c2)};
        const auto kg1 = kantorovich_gradient(d1, prev1, m1);
        const auto kg2 = kantorovich_gradient(d2, prev2, m2);
        for (int f : mesh1d.interior_faces()) {
            const Face& face = mesh1d.face(f);
            const size_t kk = static_cast<size_t>(face.cell_k), ll = static_cast<size_t>(face.cell_l);
            const double d = params.alpha * face.tau * (c[kk] - c[ll]);
            g[kk] += d;
            g[ll] -= d;
        }
        for (size_t k = 0; k < c.size(); ++k) {
            g[k] += h * params.chi * (1.0 - 2.0 * c[k]);
            g[k] += h * f_log_regularized(c[k], params.theta[0], params.theta[1]);
            g[k] += h * (params.psi1[k] - params.psi2[k]);
            g[k] += (h / tau) * (kg1.phi[k] - kg2.phi[k]);
        }
    };

    std::vector<double> c = prev1.values;
    double obj = objective_of(c);
    std::vector<double> g, trial(c.size()), pg(c.size());
    double step_size = 1.0;

    JkoStepResult res;
    res.iterations = 0;
    for (; res.iterations < opts.max_iterations; ++res.iterations) {
        gradient_of(c, g);

        // projected gradient with unit reference step
        for (size_t i = 0; i < c.size(); ++i)
            trial[i] = c[i] - g[i];
        project_box_mass(trial, target_sum);
        double pg_sq = 0.0;
        for (size_t i = 0; i < c.size(); ++i) {
            pg[i] = c[i] - trial[i];
            pg_sq += pg[i] * pg[i];
        }
        res.pg_norm = std::sqrt(pg_sq);
        if (res.pg_norm <= opts.pg_tolerance) {
            res.converged = true;
            break;
        }

        bool accepted = false;
        double s = step_size;
        for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
            for (size_t i = 0; i < c.size(); ++i)
                trial[i] = c[i] - s * g[i];
            project_box_mass(trial, target_sum);
            double move_sq = 0.0;
            for (size_t i = 0; i < c.size(); ++i) {
                const double d = trial[i] - c[i];
                move_sq += d * d;
            }
            if (move_sq == 0.0)
                break;
            const double obj_try = objective_of(trial);
            if (obj_try <= obj - opts.armijo * move_sq / s) {
                c = trial;
                obj = obj_try;
                accepted = true;
                if (bt == 0)
                    step_size = s * 1.5;
                else
                    step_size = s;
                break;
            }
            s *= 0.5;
        }
        if (!accepted) {
            // stalled: either at the numerical floor of the objective or on a
            // kink of W^2; report the current projected-gradient norm
            break;
        }
    }

    res.c1 = Density1D{h, c};
    std::vector<double> c2(c.size());
    for (size_t i = 0; i < c.size(); ++i)
        c2[i] = 1.0 - c[i];
    res.c2 = Density1D{h, std::move(c2)};
    res.energy = energy_of(c);
    res.w_sq = wsq_of(c);
    res.objective = res.energy + res.w_sq / (2.0 * tau);
    return res;
}

JkoTrajectory jko_run(const Mesh& mesh1d, const ModelParams& params,
                      const Density1D& initial1, double tau, int n_steps,
                      const JkoOptions& opts)
{
    const double h = uniform_h(mesh1d);
    if (initial1.size() != mesh1d.num_cells())
        throw std::invalid_argument("jko_run: density/mesh size mismatch");

    JkoTrajectory traj;
    traj.tau = tau;
    traj.h = h;
    traj.c1.push_back(initial1.values);

    State st;
    st.kind = params.kind;
    st.c1 = initial1.values;
    JkoStepInfo info0;
    info0.time = 0.0;
    info0.energy = discrete_energy(mesh1d, st, params).e_total;
    info0.objective = info0.energy;
    info0.converged = true;
    traj.steps.push_back(info0);

    Density1D cur1 = initial1;
    Density1D cur2{h, {}};
    cur2.values.resize(cur1.values.size());
    for (size_t i = 0; i < cur1.values.size(); ++i)
        cur2.values[i] = 1.0 - cur1.values[i];

    for (int nstep = 1; nstep <= n_steps; ++nstep) {
        JkoStepResult r = jko_step(mesh1d, params, cur1, cur2, tau, opts);
        JkoStepInfo info;
        info.time = nstep * tau;
        info.energy = r.energy;
        info.w_sq = r.w_sq;
        info.objective = r.objective;
        info.iterations = r.iterations;
        info.converged = r.converged;
        info.pg_norm = r.pg_norm;
        traj.steps.push_back(info);
        traj.c1.push_back(r.c1.values);
        cur1 = std::move(r.c1);
        cur2 = std::move(r.c2);
    }
    return traj;
}

double l2_gap(double h, const std::vector<double>& a, const std::vector<double>& b)
{
    if (a.size() != b.size())
        throw std::invalid_argument("l2_gap: size mismatch");
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(h * s);
}

std::vector<double> compare_trajectories(const Mesh& mesh1d, const Trajectory& fv,
                                         const JkoTrajectory& jko,
                                         const std::vector<double>& times)
{
    const double h = uniform_h(mesh1d);
    if (std::abs(jko.h - h) > 1e-13 * h)
        throw std::invalid_argument("compare_trajectories: grid mismatch");

    std::vector<double> gaps;
    gaps.reserve(times.size());
    for (double t : times) {
        const State* fv_state = nullptr;
        for (const State& s : fv.snapshots)
            if (std::abs(s.time - t) <= 1e-9 * std::max(1.0, t)) {
                fv_state = &s;
                break;
            }
        if (!fv_state)
            throw std::invalid_argument("compare_trajectories: no FV snapshot at requested time");
        const double idx_real = t / jko.tau;
        const auto idx = static_cast<size_t>(std::llround(idx_real));
        if (std::abs(idx_real - static_cast<double>(idx)) > 1e-6 || idx >= jko.c1.size())
            throw std::invalid_argument("compare_trajectories: no JKO state at requested time");
        if (fv_state->c1.size() != jko.c1[idx].size())
            throw std::invalid_argument("compare_trajectories: grid mismatch");
        gaps.push_back(l2_gap(h, fv_state->c1, jko.c1[idx]));
    }
    return gaps;
}

} // namespace chfv
