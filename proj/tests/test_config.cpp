#include "chfv/config.hpp"
#include "chfv/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace chfv;

TEST_CASE("cross preset fixes the published parameters")
{
    const RunConfig cfg = parse_config_text("preset = cross\nmodel = nonlocal\n", "test");
    CHECK(cfg.alpha == doctest::Approx(3.6e-4));
    CHECK(cfg.chi == doctest::Approx(0.8));
    CHECK(cfg.m1 == 1.0);
    CHECK(cfg.m2 == 1.0);
    CHECK(cfg.theta1 == 0.0);
    CHECK(cfg.theta2 == 0.0);
    CHECK(cfg.psi1_spec == "zero");
    CHECK(cfg.initial_kind == "cross");
    CHECK(cfg.t_end == doctest::Approx(0.1));
    REQUIRE(cfg.output_times.size() == 3);
    CHECK(cfg.output_times[0] == doctest::Approx(1e-2));
    CHECK(cfg.output_times[1] == doctest::Approx(2e-2));
    CHECK(cfg.output_times[2] == doctest::Approx(1e-1));
}

TEST_CASE("spinodal preset fixes the published parameters")
{
    const RunConfig cfg =
        parse_config_text("preset = spinodal\nmodel = nonlocal\nseed = 7\n", "test");
    CHECK(cfg.alpha == doctest::Approx(3e-4));
    CHECK(cfg.chi == doctest::Approx(0.96));
    CHECK(cfg.initial_kind == "spinodal");
    CHECK(cfg.spinodal_amplitude == doctest::Approx(0.01));
    CHECK(cfg.m1 == 1.0);
    CHECK(cfg.theta1 == 0.0);
}

TEST_CASE("config validation errors")
{
    // theta > 0 with the local model
    CHECK_THROWS_AS(parse_config_text("preset = cross\nmodel = local\ntheta1 = 0.1\n", "t"),
                    ConfigError);
    // unknown key
    CHECK_THROWS_AS(parse_config_text("preset = cross\nbogus = 1\n", "t"), ConfigError);
    // duplicate key
    CHECK_THROWS_AS(parse_config_text("preset = cross\nalpha = 1\nalpha = 2\n", "t"), ConfigError);
    // spinodal without a seed
    CHECK_THROWS_AS(parse_config_text("preset = spinodal\n", "t"), ConfigError);
    // missing everything
    CHECK_THROWS_AS(parse_config_text("model = local\n", "t"), ConfigError);
    // malformed line
    CHECK_THROWS_AS(parse_config_text("preset cross\n", "t"), ConfigError);
    // unsupported rng
    CHECK_THROWS_AS(parse_config_text("preset = cross\nrng = lcg\n", "t"), ConfigError);
}

TEST_CASE("explicit keys override preset defaults")
{
    const RunConfig cfg =
        parse_config_text("preset = cross\nchi = 0.5\nnx = 16\nny = 16\n", "test");
    CHECK(cfg.chi == doctest::Approx(0.5));
    CHECK(cfg.nx == 16);
    CHECK(cfg.alpha == doctest::Approx(3.6e-4)); // untouched preset value
}

TEST_CASE("uniform initial condition")
{
    const RunConfig cfg = parse_config_text(
        "mesh = cartesian\nnx = 4\nny = 4\nlx = 1\nly = 1\n"
        "alpha = 1e-3\nchi = 0.8\ninitial = uniform:0.5\nt_end = 0\n",
        "test");
    const Mesh mesh = build_mesh(cfg);
    const State s = initial_condition(cfg, mesh);
    double mass = 0.0;
    for (int k = 0; k < mesh.num_cells(); ++k) {
        CHECK(s.c1[static_cast<size_t>(k)] == 0.5);
        mass += mesh.cell(k).measure * s.c1[static_cast<size_t>(k)];
    }
    CHECK(mass == doctest::Approx(0.5));
}

TEST_CASE("cross initial condition: inclusion-exclusion mass 2wl - w^2")
{
    // the cell-averaged indicator reproduces |cross| = 2 w l - w^2 = 0.28 on
    // any covering grid, aligned with cell boundaries or not
    for (int n : {32, 40, 50}) {
        const RunConfig cfg = parse_config_text(
            "mesh = cartesian\nnx = " + std::to_string(n) + "\nny = " + std::to_string(n) +
                "\nlx = 1\nly = 1\n"
                "alpha = 3.6e-4\nchi = 0.8\ninitial = cross\nt_end = 0\n",
            "test");
        const Mesh mesh = build_mesh(cfg);
        const State s = initial_condition(cfg, mesh);
        double mass = 0.0;
        int interior = 0, mixed = 0;
        for (int k = 0; k < mesh.num_cells(); ++k) {
            const double v = s.c1[static_cast<size_t>(k)];
            mass += mesh.cell(k).measure * v;
            if (v == 1.0)
                ++interior;
            else if (v > 0.0 && v < 1.0)
                ++mixed;
        }
        CHECK(mass == doctest::Approx(0.28).epsilon(1e-12));
        CHECK(interior > 0);
        if (n != 40)
            CHECK(mixed > 0); // cut cells carry fractional saturations
    }
}

TEST_CASE("spinodal initial condition: range, exact mean, determinism")
{
    const std::string text =
        "preset = spinodal\nmodel = nonlocal\nseed = 1234\n";
    const RunConfig cfg = parse_config_text(text, "test");
    const Mesh mesh = build_mesh(cfg);
    const State a = initial_condition(cfg, mesh);
    const State b = initial_condition(cfg, mesh);

    double mean = 0.0;
    for (double v : a.c1) {
        CHECK(v >= 0.49 - 1e-2); // amplitude 0.01 plus the tiny mean shift
        CHECK(v <= 0.51 + 1e-2);
        mean += v;
    }
    mean /= static_cast<double>(a.c1.size());
    CHECK(mean == doctest::Approx(0.5).epsilon(1e-14));

    // identical seed: bit-identical; different seed: different field
    for (size_t k = 0; k < a.c1.size(); ++k)
        CHECK(a.c1[k] == b.c1[k]);

    RunConfig cfg2 = cfg;
    cfg2.seed = 4321;
    const State c = initial_condition(cfg2, mesh);
    bool differs = false;
    for (size_t k = 0; k < a.c1.size(); ++k)
        differs |= (a.c1[k] != c.c1[k]);
    CHECK(differs);
}

TEST_CASE("psi specs resolve to per-cell fields")
{
    const RunConfig cfg = parse_config_text(
        "mesh = cartesian\nnx = 2\nny = 2\nlx = 1\nly = 1\n"
        "alpha = 1\nchi = 1\ninitial = uniform:0.5\nt_end = 0\n"
        "psi1 = linear:2,-1\n",
        "test");
    const Mesh mesh = build_mesh(cfg);
    const ModelParams p = build_params(cfg, mesh);
    for (int k = 0; k < mesh.num_cells(); ++k) {
        const Point c = mesh.cell(k).center;
        CHECK(p.psi1[static_cast<size_t>(k)] == doctest::Approx(2.0 * c[0] - c[1]));
        CHECK(p.psi2[static_cast<size_t>(k)] == 0.0);
    }
}

TEST_CASE("1D mesh from config")
{
    const RunConfig cfg = parse_config_text(
        "mesh = cartesian\nnx = 64\nlx = 1\n"
        "alpha = 5e-3\nchi = 0.8\ninitial = uniform:0.5\nt_end = 0\n",
        "test");
    const Mesh mesh = build_mesh(cfg);
    CHECK(mesh.dim() == 1);
    CHECK(mesh.num_cells() == 64);
}
