#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bepo/assembly.hpp"
#include "bepo/errors.hpp"
#include "bepo/parallel.hpp"
#include "bepo/solver.hpp"

using namespace bepo;

namespace {

Grid make_grid(int n, double lambda) { return Grid(GridSpec{3.5, 3.5, 1.0, lambda, n, n, n}); }

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0;
  for (std::size_t q = 0; q < a.size(); ++q) m = std::max(m, std::abs(a[q] - b[q]));
  return m;
}

double max_abs(std::span<const double> a) {
  double m = 0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST_SUITE("solver") {
  TEST_CASE("constant observable gives the constant solution") {
    const Grid g = make_grid(9, 1e-2);
    for (double c : {1.0, -2.5}) {
      const SparseSystem sys = assemble_system(g, ModelParams{}, Observable::constant(c));
      const SolveReport r = solve_resolvent(sys, g, SolverConfig{});
      CHECK(r.statistic == doctest::Approx(c).epsilon(1e-9));
      CHECK(r.spread <= 1e-8);
      for (double v : r.v) REQUIRE(std::abs(v - c) <= 1e-8 * std::abs(c));
    }
  }

  TEST_CASE("zero right-hand side") {
    const Grid g = make_grid(9, 1e-2);
    const ResolventSolver s(assemble_matrix(g, ModelParams{}, g.lambda()), g, SolverConfig{});
    const SolveReport r = s.solve(std::vector<double>(g.size(), 0.0));
    CHECK(r.iterations == 0);
    CHECK(r.statistic == 0.0);
    CHECK(max_abs(r.v) == 0.0);
  }

  TEST_CASE("true residual meets the tolerance and solves are deterministic") {
    const Grid g = make_grid(17, 1e-2);
    const SparseSystem sys = assemble_system(g, ModelParams{}, Observable::plastic_band(1.0));
    const SolverConfig cfg{};
    const SolveReport a = solve_resolvent(sys, g, cfg);
    const SolveReport b = solve_resolvent(sys, g, cfg);
    CHECK(a.v == b.v);
    CHECK(a.iterations == b.iterations);

    std::vector<double> mv(g.size());
    spmv(sys.matrix, a.v, mv);
    for (std::size_t q = 0; q < mv.size(); ++q) mv[q] -= sys.rhs[q];
    CHECK(norm2(mv) <= cfg.rel_tol * norm2(sys.rhs) * (1 + 1e-6));
    CHECK(a.rel_residual <= cfg.rel_tol);
    CHECK(a.statistic == a.v[g.offset(9, 9, 9)]);
  }

  TEST_CASE("linearity") {
    const Grid g = make_grid(17, 1e-2);
    const ResolventSolver s(assemble_matrix(g, ModelParams{}, g.lambda()), g, SolverConfig{});
    const std::vector<double> g1 = assemble_rhs(g, Observable::plastic_band(0.5));
    const std::vector<double> g2 = assemble_rhs(g, Observable::crossing_speed(0.3, 0.5));
    std::vector<double> mix(g.size());
    for (std::size_t q = 0; q < mix.size(); ++q) mix[q] = 2.0 * g1[q] - 3.0 * g2[q];
    const SolveReport r1 = s.solve(g1), r2 = s.solve(g2), rm = s.solve(mix);
    std::vector<double> combo(g.size());
    for (std::size_t q = 0; q < combo.size(); ++q) combo[q] = 2.0 * r1.v[q] - 3.0 * r2.v[q];
    CHECK(max_abs_diff(rm.v, combo) <= 1e-6 * max_abs(combo));
  }

  TEST_CASE("orderings and the constant-mode augmentation change the path, not the answer") {
    const Grid g = make_grid(17, 1e-2);
    const SparseSystem sys = assemble_system(g, ModelParams{}, Observable::plastic_band(1.0));
    const SolveReport ref = solve_resolvent(sys, g, SolverConfig{});
    SolverConfig natural{};
    natural.ordering = Ordering::Natural;
    SolverConfig plain{};
    plain.deflate_constant = false;
    for (const SolverConfig& cfg : {natural, plain}) {
      const SolveReport r = solve_resolvent(sys, g, cfg);
      CHECK(max_abs_diff(r.v, ref.v) <= 1e-7);
    }
  }

  TEST_CASE("upwind ordering is a permutation and the preconditioner accepts aliasing") {
    const Grid g = make_grid(9, 1e-2);
    std::vector<std::size_t> perm = upwind_ordering(g);
    std::vector<std::size_t> sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> iota(g.size());
    std::iota(iota.begin(), iota.end(), 0);
    CHECK(sorted == iota);

    const CsrMatrix m = assemble_matrix(g, ModelParams{}, g.lambda());
    const Ilut ilu(m, 1e-6, 60, 0.0, perm);
    CHECK(ilu.size() == g.size());
    std::vector<double> b(g.size());
    for (std::size_t q = 0; q < b.size(); ++q) b[q] = std::sin(0.1 * q);
    std::vector<double> x(g.size());
    ilu.apply(b, x);
    std::vector<double> inplace = b;
    ilu.apply(inplace, inplace);
    CHECK(inplace == x);
  }

  TEST_CASE("iteration budget exhaustion is reported") {
    const Grid g = make_grid(17, 1e-3);
    const SparseSystem sys = assemble_system(g, ModelParams{}, Observable::plastic_band(1.0));
    SolverConfig cfg{};
    cfg.max_iters = 2;
    cfg.rel_tol = 1e-14;
    try {
      solve_resolvent(sys, g, cfg);
      FAIL("expected NoConvergence");
    } catch (const NoConvergence& e) {
      CHECK(e.iterations() <= 2);
      CHECK(e.residual() > 1e-14);
    }
  }

  TEST_CASE("statistic and spread readout") {
    const Grid g = make_grid(9, 1e-2);
    std::vector<double> v(g.size(), 0.7);
    Statistic s = evaluate_statistic(v, g);
    CHECK(s.value == 0.7);
    CHECK(s.spread == 0.0);

    v[g.offset(4, 6, 1)] += 0.01;  // inside the central half-box (|x|, |y| <= x_bar / 2)
    s = evaluate_statistic(v, g);
    CHECK(s.spread == doctest::Approx(0.01).epsilon(1e-12));

    std::vector<double> w(g.size(), 0.7);
    w[g.offset(1, 1, 1)] += 0.01;
    w[g.offset(9, 2, 5)] -= 0.3;
    s = evaluate_statistic(w, g);
    CHECK(s.spread == 0.0);
  }

  TEST_CASE("boundedness diagnostic") {
    const Grid g = make_grid(9, 1e-2);
    const SparseSystem sys = assemble_system(g, ModelParams{}, Observable::plastic_band(1.0));
    const SolveReport r = solve_resolvent(sys, g, SolverConfig{});
    BoundednessCheck b = check_boundedness(r.v, sys.rhs, g);
    CHECK(b.ok);
    CHECK(b.max_g == 1.0);
    CHECK(b.max_v == doctest::Approx(r.max_abs));

    std::vector<double> bad = r.v;
    bad[g.offset(3, 4, 5)] = 2.0;
    b = check_boundedness(bad, sys.rhs, g);
    CHECK_FALSE(b.ok);
    CHECK(b.worst == NodeIndex{3, 4, 5});
  }

  TEST_CASE("reflection symmetry for an even observable") {
    const Grid g = make_grid(17, 1e-2);
    const SolverConfig cfg{};
    const SparseSystem sys = assemble_system(g, ModelParams{}, Observable::crossing_speed(0.0, 0.5));
    const SolveReport r = solve_resolvent(sys, g, cfg);
    double worst = 0;
    for (std::size_t l = 0; l < g.size(); ++l) worst = std::max(worst, std::abs(r.v[l] - r.v[g.reflect(l)]));
    CHECK(worst <= 10 * cfg.rel_tol * r.max_abs);
  }

  TEST_CASE("configuration checks and names") {
    SolverConfig c{};
    CHECK_NOTHROW(c.validate());
    c.rel_tol = 0;
    CHECK_THROWS_AS(c.validate(), InvalidSpec);
    c = SolverConfig{};
    c.restart = 0;
    CHECK_THROWS_AS(c.validate(), InvalidSpec);
    CHECK(ordering_from_string(to_string(Ordering::Natural)) == Ordering::Natural);
    CHECK(ordering_from_string(to_string(Ordering::Upwind)) == Ordering::Upwind);
    CHECK_THROWS_AS(ordering_from_string("diagonal"), InvalidSpec);
  }

  TEST_CASE("solution CSV and summary") {
    const Grid g = make_grid(3, 1.0);
    const SparseSystem sys = assemble_system(g, ModelParams{}, Observable::constant(1.0));
    const SolveReport r = solve_resolvent(sys, g, SolverConfig{});
    std::ostringstream os;
    write_solution_csv(os, r.v, g);
    const std::string csv = os.str();
    CHECK(csv.rfind("i,j,k,x,y,z,v\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 28);
    const std::string js = solve_summary_json(r);
    for (const char* key : {"\"statistic\"", "\"spread\"", "\"residual\"", "\"iterations\""})
      CHECK(js.find(key) != std::string::npos);
  }
}
