#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bepo/config.hpp"
#include "bepo/experiments.hpp"

using namespace bepo;
namespace fs = std::filesystem;

namespace {

RunConfig small(Experiment e, std::vector<double> sweep = {}) {
  RunConfig c = parse_config("");
  c.experiment = e;
  c.sweep = std::move(sweep);
  c.grid.I = c.grid.J = c.grid.K = 17;
  c.grid.lambda = 1e-2;
  c.observable.eps0 = 0.5;
  c.sim.n_steps = 200'000;
  c.sim.burn_in = 2'000;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bepo-test-" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_SUITE("experiments") {
  TEST_CASE("crossing sweep is symmetric in the level") {
    RunConfig c = small(Experiment::CrossingSweep, {1.0, -1.0, 0.0});
    c.monte_carlo = false;
    const SweepTable t = run_crossing_sweep(c);
    REQUIRE(t.rows.size() == 3);
    CHECK(t.rows[0].level == 1.0);
    CHECK(t.rows[1].level == -1.0);
    CHECK(std::abs(t.rows[0].pde - t.rows[1].pde) <= 10 * c.solver.rel_tol * std::abs(t.rows[0].pde));
    CHECK(t.rows[2].pde > t.rows[0].pde);
    for (const SweepRow& r : t.rows) CHECK_FALSE(r.mc.has_value());
  }

  TEST_CASE("crossing level outside the box") {
    RunConfig c = small(Experiment::CrossingSweep, {10.0});
    c.monte_carlo = false;
    const SweepTable t = run_crossing_sweep(c);
    CHECK_FALSE(t.warnings.empty());
    CHECK(std::abs(t.rows[0].pde) < 1e-6);
  }

  TEST_CASE("noise-free oscillator at rest never crosses a nonzero level") {
    RunConfig c = small(Experiment::CrossingSweep, {-1.0, 0.5, 2.0});
    c.model.sigma = 0;
    const SweepTable t = run_crossing_sweep(c);
    for (const SweepRow& r : t.rows) {
      REQUIRE(r.mc.has_value());
      CHECK(r.mc->value == 0.0);
    }
  }

  TEST_CASE("serviceability sweep") {
    RunConfig c = small(Experiment::ServiceabilitySweep, {0.0, 0.5, 1.0, 4.5});
    const SweepTable t = run_serviceability_sweep(c);
    REQUIRE(t.rows.size() == 4);
    // The band covers the whole box: the constant-solution case.
    CHECK(t.rows[3].pde == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(t.rows[3].mc->value == 1.0);
    for (const SweepRow& r : t.rows) {
      CHECK(r.mc->value >= 0.0);
      CHECK(r.mc->value <= 1.0);
      CHECK(r.pde >= -0.02);
      CHECK(r.pde <= 1.02);
      CHECK(r.bounded);
    }
    CHECK(t.rows[1].mc->value <= t.rows[2].mc->value);
    CHECK(t.rows[0].mc->value <= t.rows[1].mc->value);

    std::ostringstream os;
    write_sweep_csv(os, t);
    CHECK(os.str().rfind("a2,P_pde,P_mc,P_mc_se,spread,residual\n", 0) == 0);
  }

  TEST_CASE("sweep CSV header for crossings") {
    SweepTable t;
    t.kind = Experiment::CrossingSweep;
    t.rows.push_back(SweepRow{});
    std::ostringstream os;
    write_sweep_csv(os, t);
    CHECK(os.str().rfind("a1,nu_pde,nu_mc,nu_mc_se,spread,residual\n", 0) == 0);
  }

  TEST_CASE("manifest replays the run bit for bit") {
    const RunConfig c = small(Experiment::Solve);
    const fs::path a = scratch("replay-a"), b = scratch("replay-b");
    const RunResult first = run_experiment(c, a);
    CHECK(first.ok);
    REQUIRE(fs::exists(a / "manifest.json"));
    REQUIRE(fs::exists(a / "solution.csv"));

    const nlohmann::json m = nlohmann::json::parse(slurp(a / "manifest.json"));
    CHECK(m.at("tool") == "bepo");
    CHECK(m.at("version") == kToolVersion);
    CHECK(m.at("experiment") == "solve");

    RunConfig replay = load_config(a / "manifest.json");
    CHECK(replay == c);
    run_experiment(replay, b);
    CHECK(slurp(a / "solution.csv") == slurp(b / "solution.csv"));
    CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
    fs::remove_all(a);
    fs::remove_all(b);
  }

  TEST_CASE("Monte Carlo outputs replay from the seed") {
    RunConfig c = small(Experiment::ServiceabilitySweep, {0.5, 1.5});
    c.sim.n_paths = 3;
    const fs::path a = scratch("mc-a"), b = scratch("mc-b");
    run_experiment(c, a);
    run_experiment(load_config(a / "manifest.json"), b);
    CHECK(slurp(a / "serviceability_sweep.csv") == slurp(b / "serviceability_sweep.csv"));
    fs::remove_all(a);
    fs::remove_all(b);
  }

  TEST_CASE("cross-validation report") {
    RunConfig c = small(Experiment::CrossValidate);
    c.cross.levels = {0.0};
    c.cross.radii = {0.5, 1.5};
    const CrossReport r = run_cross_validate(c);
    REQUIRE(r.rows.size() == 3);
    CHECK(r.rows[0].kind == "crossing");
    CHECK(r.rows[1].kind == "band");
    CHECK(r.band_monotone);
    for (const CrossRow& row : r.rows) {
      const double tol = row.kind == "band" ? std::max(c.cross.band_abs, c.cross.se_factor * row.mc_se)
                                            : std::max(c.cross.crossing_rel * row.mc, c.cross.se_factor * row.mc_se);
      CHECK(row.tolerance == doctest::Approx(tol));
      CHECK(row.pass == (std::abs(row.pde - row.mc) <= row.tolerance));
    }
    std::ostringstream os;
    write_cross_csv(os, r);
    CHECK(os.str().rfind("kind,level,pde,mc,mc_se,tolerance,pass\n", 0) == 0);
  }
}
