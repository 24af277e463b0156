#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bepo/errors.hpp"
#include "bepo/observables.hpp"

using namespace bepo;

TEST_SUITE("observables") {
  TEST_CASE("mollified crossing speed") {
    const double peak_width = 1.0 / std::sqrt(2 * std::numbers::pi);
    const Observable g = Observable::crossing_speed(0.3, peak_width);
    CHECK(g(0.3, 1.0, -0.2) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g(1.7, 0.0, 0.4) == 0.0);
    CHECK(g(-2.0, -0.0, 0.0) == 0.0);
    CHECK(g(0.3 + 10 * peak_width, 1.0, 0.0) <= std::exp(-50.0) / (std::sqrt(2 * std::numbers::pi) * peak_width));
    CHECK(g(0.3, -2.0, 0.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(g(0.5, 1.0, 0.9) == g(0.5, 1.0, -0.9));
    CHECK_THROWS_AS(Observable::crossing_speed(0.0, 0.0), InvalidWidth);
    CHECK_THROWS_AS(Observable::crossing_speed(0.0, -1e-3), InvalidWidth);
  }

  TEST_CASE("the mollifier integrates to |y|") {
    const double eps0 = 0.05, y = 1.7;
    const Observable g = Observable::crossing_speed(0.2, eps0);
    // Composite Simpson on [-3.5, 3.5].
    const int n = 20000;
    const double a = -3.5, h = 7.0 / n;
    double s = g(a, y, 0) + g(a + n * h, y, 0);
    for (int q = 1; q < n; ++q) s += (q % 2 ? 4 : 2) * g(a + q * h, y, 0);
    CHECK(s * h / 3 == doctest::Approx(y).epsilon(1e-6));
  }

  TEST_CASE("plastic band") {
    const Observable g = Observable::plastic_band(0.0);
    CHECK(g(0.4, 9.0, 0.4) == 1.0);
    CHECK(g(0.4, 9.0, 0.3) == 0.0);
    const Observable h = Observable::plastic_band(0.5);
    CHECK(h(1.5, 0.0, 1.0) == 1.0);   // on the closed edge
    CHECK(h(0.5, 0.0, 1.0) == 1.0);
    CHECK(h(1.0 + 0.5 + 1e-12, 0.0, 1.0) == 0.0);
    CHECK(h(1.2, -3.0, 1.0) == h(1.2, 3.0, 1.0));
    CHECK_THROWS_AS(Observable::plastic_band(-0.1), NegativeBand);
  }

  TEST_CASE("evenness and monotonicity") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3, 3);
    const Observable c = Observable::crossing_speed(0.0, 0.3);
    const Observable narrow = Observable::plastic_band(0.4), wide = Observable::plastic_band(0.9);
    for (int n = 0; n < 1000; ++n) {
      const double x = u(rng), y = u(rng), z = u(rng) / 3;
      REQUIRE(c(x, y, z) == c(-x, -y, -z));
      REQUIRE(c(x, y, z) >= 0.0);
      REQUIRE(narrow(x, y, z) == narrow(-x, -y, -z));
      REQUIRE(narrow(x, y, z) <= wide(x, y, z));
    }
  }

  TEST_CASE("sup norms") {
    const GridSpec s{};
    const double eps0 = 0.2;
    CHECK(*Observable::crossing_speed(0.0, eps0).sup_norm(s) ==
          doctest::Approx(s.y_bar / (std::sqrt(2 * std::numbers::pi) * eps0)));
    CHECK(*Observable::plastic_band(1.0).sup_norm(s) == 1.0);
    CHECK(*Observable::constant(-3.0).sup_norm(s) == 3.0);
  }

  TEST_CASE("default width and resolution warnings") {
    GridSpec s{};
    s.I = s.J = s.K = 33;
    s.lambda = 1e-2;
    const Grid grid(s);
    CHECK(default_eps0(s) == s.x_bar / 64);
    CHECK_FALSE(Observable::crossing_speed(0.0, default_eps0(s)).warnings(grid).empty());
    // Exactly two unscaled x-cells is resolved.
    CHECK(Observable::crossing_speed(0.0, s.x_bar / 8).warnings(grid).empty());
    CHECK_FALSE(Observable::crossing_speed(10.0, s.x_bar / 8).warnings(grid).empty());
    CHECK(Observable::plastic_band(1.0).warnings(grid).empty());
  }

  TEST_CASE("tabulated observable") {
    GridSpec s{};
    s.I = s.J = s.K = 3;
    s.lambda = 1.0;
    std::vector<double> values(27);
    for (std::size_t q = 0; q < values.size(); ++q) values[q] = static_cast<double>(q);
    const Observable t = Observable::tabulated(s, values);
    const Grid grid(s);
    CHECK(t(grid.x(2), grid.y(3), grid.z(1)) == values[grid.offset(2, 3, 1)]);
    CHECK(t(100.0, -100.0, 0.0) == values[grid.offset(3, 1, 2)]);
    CHECK_FALSE(t.sup_norm(s).has_value());
    CHECK_FALSE(t.warnings(grid).empty());
    CHECK_THROWS_AS(Observable::tabulated(s, std::vector<double>(5)), ShapeMismatch);
  }
}
