#include <doctest.h>

#include <random>

#include "bepo/errors.hpp"
#include "bepo/model.hpp"

using namespace bepo;

TEST_SUITE("model") {
  TEST_CASE("drift at hand-evaluated points") {
    const ModelParams p{};  // k = 1, alpha = 0.5, f = -y
    CHECK(drift_beta(0, 0, 0, p) == 0.0);
    CHECK(drift_beta(1, 1, 1, p) == -2.0);
    CHECK(drift_beta(2, 0, -1, p) == -0.5);
  }

  TEST_CASE("drift is affine in each argument and odd for an odd force") {
    const ModelParams p{};
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-4, 4);
    for (int n = 0; n < 200; ++n) {
      const double x = u(rng), y = u(rng), z = u(rng), h = u(rng);
      const double b0 = drift_beta(x, y, z, p);
      CHECK(drift_beta(x + h, y, z, p) - b0 == doctest::Approx(-p.k * p.alpha * h).epsilon(1e-12));
      CHECK(drift_beta(x, y + h, z, p) - b0 == doctest::Approx(-p.force.damping * h).epsilon(1e-12));
      CHECK(drift_beta(x, y, z + h, p) - b0 == doctest::Approx(-p.k * (1 - p.alpha) * h).epsilon(1e-12));
      CHECK(drift_beta(-x, -y, -z, p) == -b0);
    }
  }

  TEST_CASE("Lyapunov function with the default coefficients is x^2 + y^2 + xy") {
    const LyapunovReport r = lyapunov_constants(ModelParams{});
    CHECK(lyapunov_value(0, 0, r) == 0.0);
    CHECK(lyapunov_value(1, 1, r) == 3.0);
    CHECK(lyapunov_value(1, -1, r) == 1.0);
    CHECK(lyapunov_value(2, 2, r) == 12.0);
  }

  TEST_CASE("Lyapunov constants") {
    const LyapunovReport r = lyapunov_constants(ModelParams{});
    CHECK(r.C == doctest::Approx(1.75).epsilon(1e-15));
    CHECK(r.C1 == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(r.bound == doctest::Approx(10.5).epsilon(1e-14));

    ModelParams linear{};
    linear.alpha = 1.0;
    CHECK(lyapunov_constants(linear).C == doctest::Approx(1.0).epsilon(1e-15));

    ModelParams antidamped{};
    antidamped.force.damping = -1.0;  // f = +y
    CHECK_THROWS_AS(lyapunov_constants(antidamped), AssumptionViolation);

    ModelParams stiff{};
    stiff.force.stiffness_x = 1.0;  // c1 > k alpha
    CHECK_THROWS_AS(lyapunov_constants(stiff), AssumptionViolation);
  }

  TEST_CASE("Lyapunov function is nonnegative, also with a force offset") {
    ModelParams shifted{};
    shifted.force.offset = 0.3;
    for (const ModelParams& p : {ModelParams{}, shifted}) {
      const LyapunovReport r = lyapunov_constants(p);
      CHECK(r.C > 0);
      CHECK(r.C1 > 0);
      std::mt19937_64 rng(11);
      std::uniform_real_distribution<double> u(-10, 10);
      for (int n = 0; n < 1000; ++n) CHECK(lyapunov_value(u(rng), u(rng), r) >= 0.0);
    }
  }

  TEST_CASE("parameter validation") {
    ModelParams p{};
    CHECK_NOTHROW(p.validate());
    p.alpha = 1.5;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = ModelParams{};
    p.b = 0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = ModelParams{};
    p.sigma = 0;
    CHECK_NOTHROW(p.validate());
    p.sigma = -1;
    CHECK_THROWS_AS(p.validate(), ValidationError);
  }
}
