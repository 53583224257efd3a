#include "chfv/errors.hpp"
#include "chfv/model.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <tuple>

using namespace chfv;

namespace {

ModelParams make_params(int n, double alpha = 1.0, double chi = 1.0)
{
    ModelParams p;
    p.alpha = alpha;
    p.chi = chi;
    p.psi1.assign(static_cast<size_t>(n), 0.0);
    p.psi2.assign(static_cast<size_t>(n), 0.0);
    return p;
}

} // namespace

TEST_CASE("eta: endpoints, midpoint, domain")
{
    CHECK(eta(0.0, 2.0, 3.0) == 0.0);
    CHECK(eta(1.0, 2.0, 3.0) == 0.0);
    CHECK(eta(0.5, 1.0, 1.0) == doctest::Approx(0.25));
    CHECK_THROWS_AS(eta(-0.01, 1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(eta(1.01, 1.0, 1.0), std::domain_error);
}

TEST_CASE("property: eta bounded by both phase mobilities")
{
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> mob(0.1, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double m1 = mob(gen), m2 = mob(gen);
        for (int i = 0; i <= 1000; ++i) {
            const double c = i / 1000.0;
            const double e = eta(c, m1, m2);
            CHECK(e <= m1 * c + 1e-15);
            CHECK(e <= m2 * (1.0 - c) + 1e-15);
            CHECK(e >= 0.0);
        }
    }
}

TEST_CASE("rho: symmetry, endpoints, substitution")
{
    for (int i = 0; i <= 20; ++i) {
        const double c = i / 20.0;
        CHECK(rho(c, 3.0, 3.0) == doctest::Approx(c));
    }
    CHECK(rho(0.0, 2.0, 5.0) == 0.0);
    CHECK(rho(1.0, 2.0, 5.0) == doctest::Approx(1.0));
    CHECK(rho(0.5, 2.0, 1.0) == doctest::Approx(2.0 / 3.0));
    CHECK_THROWS_AS(rho(1.5, 1.0, 1.0), std::domain_error);
    // monotone increasing
    double prev = -1.0;
    for (int i = 0; i <= 100; ++i) {
        const double v = rho(i / 100.0, 2.0, 0.7);
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("f_log: deep quench, symmetry, substitution, flagged infinities")
{
    for (int i = 1; i < 10; ++i)
        CHECK(f_log(i / 10.0, 0.0, 0.0) == 0.0);
    CHECK(f_log(0.5, 1.3, 1.3) == doctest::Approx(0.0));
    CHECK(f_log(0.25, 1.0, 0.0) == doctest::Approx(std::log(0.25)));
    CHECK(std::isinf(f_log(0.0, 1.0, 0.0)));
    CHECK(std::isinf(f_log(1.0, 0.0, 1.0)));
    CHECK(f_log(0.0, 0.0, 1.0) == 0.0); // endpoint allowed when its theta is 0
    CHECK(std::isfinite(f_log_regularized(0.0, 1.0, 1.0)));
}

TEST_CASE("boltzmann entropy density")
{
    CHECK(boltzmann_h(0.0) == 1.0);
    CHECK(boltzmann_h(1.0) == doctest::Approx(0.0));
    for (int i = 0; i <= 100; ++i)
        CHECK(boltzmann_h(i / 100.0) >= 0.0);
}

TEST_CASE("discrete energy: uniform mixed state")
{
    const Mesh mesh = Mesh::cartesian2d(4, 4, 1.0, 1.0);
    ModelParams p = make_params(mesh.num_cells(), 1.0, 0.8);
    State s;
    s.c1.assign(static_cast<size_t>(mesh.num_cells()), 0.5);
    const EnergyReport r = discrete_energy(mesh, s, p);
    CHECK(r.e_dir == 0.0);
    CHECK(r.e_chem == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(r.e_therm == 0.0);
    CHECK(r.e_total == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(r.mass[0] == doctest::Approx(0.5));
}

TEST_CASE("discrete energy: pure phase with one-sided theta")
{
    const Mesh mesh = Mesh::cartesian2d(3, 3, 1.0, 1.0);
    ModelParams p = make_params(mesh.num_cells());
    p.theta = {1.0, 0.0};
    State s;
    s.c1.assign(static_cast<size_t>(mesh.num_cells()), 1.0);
    const EnergyReport r = discrete_energy(mesh, s, p);
    CHECK(r.e_therm == doctest::Approx(0.0)); // theta1 H(1) = 0, theta2 = 0
    CHECK(r.entropy[1] == doctest::Approx(1.0));
}

TEST_CASE("discrete energy: two-cell Dirichlet term against a brute-force face sum")
{
    const Mesh mesh = Mesh::cartesian1d(2, 1.0);
    ModelParams p = make_params(2, 1.0, 1.0);
    State s;
    s.c1 = {0.0, 1.0};
    const EnergyReport r = discrete_energy(mesh, s, p);

    // oracle: loop over faces by hand
    double e_dir = 0.0;
    for (int f : mesh.interior_faces()) {
        const Face& face = mesh.face(f);
        const double dc = s.c1[static_cast<size_t>(face.cell_k)] - s.c1[static_cast<size_t>(face.cell_l)];
        e_dir += 0.5 * p.alpha * face.tau * dc * dc;
    }
    CHECK(e_dir == doctest::Approx(1.0)); // tau = 2, (dc)^2 = 1, alpha/2 = 1/2
    CHECK(r.e_dir == doctest::Approx(e_dir));
}

TEST_CASE("property: energy is invariant under phase relabeling")
{
    const Mesh mesh = Mesh::cartesian2d(5, 3, 1.0, 2.0);
    std::mt19937 gen(11);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    ModelParams p = make_params(mesh.num_cells(), 0.7, 1.3);
    p.theta = {0.4, 0.9};
    p.mobility = {2.0, 0.5};
    for (double& v : p.psi1)
        v = uni(gen);
    for (double& v : p.psi2)
        v = uni(gen);

    State s;
    s.c1.resize(static_cast<size_t>(mesh.num_cells()));
    for (double& v : s.c1)
        v = uni(gen);

    ModelParams q = p;
    std::swap(q.theta[0], q.theta[1]);
    std::swap(q.mobility[0], q.mobility[1]);
    std::swap(q.psi1, q.psi2);
    State t = s;
    for (double& v : t.c1)
        v = 1.0 - v;

    const EnergyReport a = discrete_energy(mesh, s, p);
    const EnergyReport b = discrete_energy(mesh, t, q);
    CHECK(a.e_dir == doctest::Approx(b.e_dir).epsilon(1e-13));
    CHECK(a.e_chem == doctest::Approx(b.e_chem).epsilon(1e-13));
    CHECK(a.e_therm == doctest::Approx(b.e_therm).epsilon(1e-13));
    CHECK(a.e_ext == doctest::Approx(b.e_ext).epsilon(1e-13));
    CHECK(a.e_total == doctest::Approx(b.e_total).epsilon(1e-13));
    CHECK(a.entropy[0] == doctest::Approx(b.entropy[1]).epsilon(1e-13));
    CHECK(a.mass[0] == doctest::Approx(b.mass[1]).epsilon(1e-13));
}

TEST_CASE("property: thermal energy vanishes only on pure counted phases")
{
    const Mesh mesh = Mesh::cartesian2d(3, 3, 1.0, 1.0);
    ModelParams p = make_params(mesh.num_cells());
    p.theta = {1.0, 1.0};
    State s;
    s.c1.assign(static_cast<size_t>(mesh.num_cells()), 0.3);
    CHECK(discrete_energy(mesh, s, p).e_therm > 0.0);
    // H(c) = 0 iff c = 1; both phases cannot be 1 at once, so e_therm > 0
    s.c1.assign(static_cast<size_t>(mesh.num_cells()), 1.0);
    const EnergyReport r = discrete_energy(mesh, s, p);
    CHECK(r.entropy[0] == doctest::Approx(0.0));
    CHECK(r.entropy[1] == doctest::Approx(1.0));
}

TEST_CASE("dissipation split: equilibrium and equal potentials")
{
    const Mesh mesh = Mesh::cartesian1d(4, 1.0);
    ModelParams p = make_params(4);
    p.kind = ModelKind::nonlocal;

    State s;
    s.kind = ModelKind::nonlocal;
    s.c1.assign(4, 0.4);
    s.mu1.assign(4, 0.7);
    s.mu2.assign(4, -0.2);
    auto [d_tot, d_exch] = half_step_dissipation(mesh, s, p);
    CHECK(d_tot == 0.0);
    CHECK(d_exch == 0.0);

    // mu1 == mu2 spatially varying: exchange part vanishes
    s.mu1 = {0.1, 0.5, -0.3, 0.9};
    s.mu2 = s.mu1;
    std::tie(d_tot, d_exch) = half_step_dissipation(mesh, s, p);
    CHECK(d_exch == doctest::Approx(0.0));
    CHECK(d_tot > 0.0);
}

TEST_CASE("dissipation split: single-face configuration against a hand sum")
{
    const Mesh mesh = Mesh::cartesian1d(2, 1.0);
    ModelParams p = make_params(2);
    p.kind = ModelKind::nonlocal;
    p.mobility = {2.0, 0.5};

    State s;
    s.kind = ModelKind::nonlocal;
    s.c1 = {0.3, 0.8};
    s.mu1 = {1.0, 0.0};
    s.mu2 = {0.0, 0.4};

    // oracle: one face, tau = 2; dv1 = 1 > 0 so c1_up = 0.3;
    // dv2 = -0.4 < 0 so c2_up = 1 - 0.8 = 0.2
    const double tau = 2.0;
    const double w1 = 2.0 * 0.3 * tau, w2 = 0.5 * 0.2 * tau;
    const double jtot = w1 * 1.0 + w2 * (-0.4);
    const double expect_tot = jtot * jtot / (w1 + w2);
    const double expect_exch = w1 * w2 / (w1 + w2) * (1.0 + 0.4) * (1.0 + 0.4);

    auto [d_tot, d_exch] = half_step_dissipation(mesh, s, p);
    CHECK(d_tot == doctest::Approx(expect_tot).epsilon(1e-14));
    CHECK(d_exch == doctest::Approx(expect_exch).epsilon(1e-14));
    CHECK(d_tot >= 0.0);
    CHECK(d_exch >= 0.0);
}

TEST_CASE("dissipation split rejects local states")
{
    const Mesh mesh = Mesh::cartesian1d(2, 1.0);
    ModelParams p = make_params(2);
    State s;
    s.kind = ModelKind::local;
    s.c1 = {0.3, 0.8};
    CHECK_THROWS_AS(half_step_dissipation(mesh, s, p), std::invalid_argument);
}

TEST_CASE("model parameter validation")
{
    ModelParams p = make_params(4);
    p.kind = ModelKind::local;
    p.theta = {0.1, 0.0};
    CHECK_THROWS_AS(p.validate(4), ConfigError);
    p.theta = {0.0, 0.0};
    CHECK_NOTHROW(p.validate(4));
    p.alpha = -1.0;
    CHECK_THROWS_AS(p.validate(4), ConfigError);
}
