#include "chfv/diagnostics.hpp"
#include "chfv/errors.hpp"
#include "chfv/experiment.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace chfv;

namespace {

std::string slurp(const std::filesystem::path& path)
{
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string tiny_spinodal(const std::string& outdir, unsigned seed)
{
    return "mesh = cartesian\nnx = 8\nny = 8\nlx = 1\nly = 1\n"
           "model = nonlocal\nalpha = 3e-4\nchi = 0.96\n"
           "initial = spinodal\nseed = " +
           std::to_string(seed) +
           "\nt_end = 5e-4\ndt0 = 1e-4\n"
           "output_times = 2e-4\n"
           "output_dir = " +
           outdir + "\n";
}

} // namespace

TEST_CASE("run_experiment writes log, csv and snapshots; outputs are deterministic")
{
    const auto base = std::filesystem::temp_directory_path() / "chfv_test_run";
    std::filesystem::remove_all(base);
    const auto dir_a = (base / "a").string();
    const auto dir_b = (base / "b").string();

    const RunConfig cfg_a = parse_config_text(tiny_spinodal(dir_a, 99), "a");
    const RunConfig cfg_b = parse_config_text(tiny_spinodal(dir_b, 99), "b");

    const Trajectory traj_a = run_experiment(cfg_a);
    const Trajectory traj_b = run_experiment(cfg_b);

    CHECK(std::filesystem::exists(base / "a" / "run.log"));
    CHECK(std::filesystem::exists(base / "a" / "energy.csv"));
    // initial state + two output times (2e-4 and t_end)
    CHECK(traj_a.snapshots.size() == 3);
    int vtk_count = 0;
    for (const auto& entry : std::filesystem::directory_iterator(base / "a"))
        if (entry.path().extension() == ".vtk")
            ++vtk_count;
    CHECK(vtk_count == 3);

    // determinism contract: identical config and seed, bit-identical CSV
    CHECK(slurp(base / "a" / "energy.csv") == slurp(base / "b" / "energy.csv"));

    // every emitted snapshot passes the bounds check
    for (const State& s : traj_a.snapshots)
        CHECK(check_bounds(s).pass);

    // run log carries one line per accepted step
    std::istringstream log(slurp(base / "a" / "run.log"));
    std::string line;
    int lines = 0;
    while (std::getline(log, line))
        ++lines;
    CHECK(lines == static_cast<int>(traj_a.steps.size()));

    std::filesystem::remove_all(base);
}

TEST_CASE("compare_experiment runs both models from one datum")
{
    const auto base = std::filesystem::temp_directory_path() / "chfv_test_cmp";
    std::filesystem::remove_all(base);

    const RunConfig cfg = parse_config_text(tiny_spinodal(base.string(), 7), "cmp");
    const ComparisonResult result = compare_experiment(cfg);

    CHECK(std::filesystem::exists(base / "comparison.csv"));
    CHECK(std::filesystem::exists(base / "nonlocal" / "energy.csv"));
    CHECK(std::filesystem::exists(base / "local" / "energy.csv"));

    REQUIRE_FALSE(result.rows.empty());
    // both columns start from the same energy and stay non-increasing
    CHECK(result.nonlocal.steps.front().energy.e_total ==
          doctest::Approx(result.local.steps.front().energy.e_total).epsilon(1e-13));
    for (size_t i = 1; i < result.nonlocal.steps.size(); ++i)
        CHECK(result.nonlocal.steps[i].energy.e_total <=
              result.nonlocal.steps[i - 1].energy.e_total + 1e-9);

    std::filesystem::remove_all(base);
}

TEST_CASE("compare_experiment rejects thermal runs")
{
    RunConfig cfg = parse_config_text(tiny_spinodal("unused", 7), "cmp");
    cfg.theta1 = 0.1;
    CHECK_THROWS_AS(compare_experiment(cfg), ConfigError);
}

TEST_CASE("jko_experiment writes the step table")
{
    const auto base = std::filesystem::temp_directory_path() / "chfv_test_jko";
    std::filesystem::remove_all(base);

    const std::string text =
        "mesh = cartesian\nnx = 16\nlx = 1\n"
        "model = nonlocal\nalpha = 5e-3\nchi = 0.8\n"
        "initial = uniform:0.5\nt_end = 0\n"
        "jko_tau = 1e-4\njko_steps = 3\noutput_dir = " +
        base.string() + "\n";
    const RunConfig cfg = parse_config_text(text, "jko");
    const JkoTrajectory traj = jko_experiment(cfg);

    CHECK(traj.steps.size() == 4);
    CHECK(std::filesystem::exists(base / "jko.csv"));
    CHECK(std::filesystem::exists(base / "jko_states.csv"));
    const std::string head = slurp(base / "jko.csv").substr(0, 60);
    CHECK(head.rfind("t,energy,w_sq,objective,iterations,converged,pg_norm", 0) == 0);

    // 2D mesh is rejected for the 1D oracle
    RunConfig bad = cfg;
    bad.ny = 4;
    bad.ly = 1.0;
    CHECK_THROWS_AS(jko_experiment(bad), ConfigError);

    std::filesystem::remove_all(base);
}
