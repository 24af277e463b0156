#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "bepo/convergence.hpp"
#include "bepo/errors.hpp"

using namespace bepo;

namespace {

GridSpec small(int n) {
  GridSpec s{};
  s.I = s.J = s.K = n;
  s.lambda = 1e-2;
  return s;
}

}  // namespace

TEST_SUITE("convergence") {
  TEST_CASE("nested refinement") {
    const GridSpec c = small(5);
    const GridSpec f = refine_nested(c, Axis::X);
    CHECK(f.I == 9);
    CHECK(f.J == 5);
    CHECK(f.K == 5);
    const Grid gc(c), gf(f);
    CHECK(gf.dx() == gc.dx() / 2);
    for (int i = 1; i <= c.I; ++i) REQUIRE(gc.xs(i) == gf.xs(2 * i - 1));
    CHECK(gc.xs(3) == gf.xs(5));
    CHECK(refine_nested(c, Axis::Z).K == 9);
  }

  TEST_CASE("sup difference on common nodes") {
    const GridSpec c = small(5), f = refine_nested(c, Axis::Y);
    const Grid gc(c), gf(f);
    std::vector<double> vc(gc.size()), vf(gf.size());
    for (std::size_t l = 0; l < gf.size(); ++l) {
      const NodeIndex a = gf.node(l);
      vf[l] = std::sin(gf.x(a.i)) + gf.y(a.j) * gf.z(a.k);
    }
    for (std::size_t l = 0; l < gc.size(); ++l) {
      const NodeIndex a = gc.node(l);
      vc[l] = std::sin(gc.x(a.i)) + gc.y(a.j) * gc.z(a.k);
    }
    CHECK(sup_diff_on_common(vc, vf, c, f) == 0.0);

    std::vector<double> fine_only = vf;
    fine_only[gf.offset(2, 2, 2)] += 1.0;  // j = 2 is not a coarse node
    CHECK(sup_diff_on_common(vc, fine_only, c, f) == 0.0);

    std::vector<double> common = vf;
    common[gf.offset(2, 3, 2)] += 0.01;  // j = 3 is coarse node 2
    CHECK(sup_diff_on_common(vc, common, c, f) == doctest::Approx(0.01).epsilon(1e-12));

    std::vector<double> edge = vf;
    edge[gf.offset(2, 1, 2)] += 0.5;
    CHECK(sup_diff_on_common(vc, edge, c, f) == doctest::Approx(0.5));
    CHECK(sup_diff_on_common(vc, edge, c, f, true) == 0.0);

    CHECK_THROWS_AS(sup_diff_on_common(vc, std::vector<double>(3), c, f), ShapeMismatch);
    const GridSpec both = refine_nested(refine_nested(c, Axis::X), Axis::Z);
    CHECK_THROWS_AS(sup_diff_on_common(vc, std::vector<double>(Grid(both).size()), c, both), ShapeMismatch);
  }

  TEST_CASE("sup difference is symmetric when the grids coincide") {
    const GridSpec c = small(5);
    const Grid g(c);
    std::vector<double> a(g.size()), b(g.size());
    for (std::size_t l = 0; l < g.size(); ++l) a[l] = std::cos(0.3 * l), b[l] = std::sin(0.2 * l);
    CHECK(sup_diff_on_common(a, b, c, c) == sup_diff_on_common(b, a, c, c));
  }

  TEST_CASE("empirical order") {
    const double e = 1e-3;
    CHECK(empirical_order(4 * e, e) == 2.0);
    CHECK(empirical_order(2 * e, e) == 1.0);
    CHECK(empirical_order(0.0160, 0.0048) == doctest::Approx(1.7517).epsilon(0.02 / 1.7517));
    CHECK(empirical_order(7.0 * 0.0160, 7.0 * 0.0048) == doctest::Approx(empirical_order(0.0160, 0.0048)));
    CHECK_THROWS_AS(empirical_order(1.0, 0.0), DegenerateDifference);
    CHECK_THROWS_AS(empirical_order(std::numeric_limits<double>::infinity(), 1.0), DegenerateDifference);
  }

  TEST_CASE("ladder on a small base grid") {
    const GridSpec base = small(9);
    const auto rows = run_ladder(base, Axis::Z, 2, ModelParams{}, Observable::crossing_speed(0.0, 1.0), SolverConfig{});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].level == 1);
    CHECK(rows[1].level == 2);
    CHECK(rows[1].h == doctest::Approx(rows[0].h / 2));
    REQUIRE(rows[0].order.has_value());
    CHECK_FALSE(rows[1].order.has_value());
    CHECK(*rows[0].order == doctest::Approx(empirical_order(rows[0].diff, rows[1].diff)));
    CHECK(rows[1].diff < rows[0].diff);

    std::ostringstream os;
    write_convergence_csv(os, rows);
    CHECK(os.str().rfind("axis,level,h,diff,order\n", 0) == 0);
    CHECK_THROWS_AS(axis_from_string("w"), InvalidSpec);
    CHECK(axis_from_string(to_string(Axis::Y)) == Axis::Y);
  }
}
