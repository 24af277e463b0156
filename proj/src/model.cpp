#include "bepo/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bepo/errors.hpp"

namespace bepo {

void ModelParams::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(k) || k <= 0) throw ValidationError("model.k must be > 0");
  if (!finite(alpha) || alpha < 0 || alpha > 1) throw ValidationError("model.alpha must lie in [0, 1]");
  if (!finite(b) || b <= 0) throw ValidationError("model.b must be > 0");
  // sigma = 0 is accepted: it gives the deterministic oscillator.
  if (!finite(sigma) || sigma < 0) throw ValidationError("model.sigma must be >= 0");
  if (!finite(force.damping) || !finite(force.stiffness_x) || !finite(force.offset))
    throw ValidationError("model.force coefficients must be finite");
}

GrowthConstants growth_constants(const ModelParams& p) {
  const double ka = p.k * p.alpha;
  const double c0 = p.force.damping;
  const double c1 = p.force.stiffness_x;
  const double f0 = p.force.offset;
  if (!(c0 > 0)) throw AssumptionViolation("force damping c0 must be > 0 for the Lyapunov bound");
  if (c1 > ka) throw AssumptionViolation("force x-coefficient c1 exceeds k*alpha");

  GrowthConstants g;
  if (f0 == 0.0) {
    g.c0 = c0;
    g.c1 = c1;
    g.d0 = c0;
    g.d1 = c1;
  } else {
    // Absorb the constant by completing squares:
    //   f0 y <= (c0/2) y^2 + f0^2/(2 c0),  f0 x <= eta x^2 + f0^2/(4 eta),
    // with eta half of the remaining margin k alpha - c1.
    const double eta = 0.5 * (ka - c1);
    if (!(eta > 0)) throw AssumptionViolation("no margin k*alpha - c1 left to absorb the force offset");
    g.c0 = 0.5 * c0;
    g.c1 = c1;
    g.c2 = f0 * f0 / (2.0 * c0);
    g.d0 = c0;
    g.d1 = c1 + eta;
    g.d2 = f0 * f0 / (4.0 * eta);
  }
  if (!(g.d1 < ka)) throw AssumptionViolation("d1 must be strictly below k*alpha");
  return g;
}

LyapunovReport lyapunov_constants(const ModelParams& p) {
  p.validate();
  const GrowthConstants g = growth_constants(p);
  const double ka = p.k * p.alpha;

  LyapunovReport r;
  r.growth = g;
  r.vxx = ka + g.c0 * g.d0 / 2.0 - g.c1;
  r.vyy = 1.0;
  r.vxy = g.c0;
  if (!(r.vxx > g.c0 * g.c0 / 4.0)) throw AssumptionViolation("Lyapunov quadratic form is not positive definite");

  const double plastic = p.k * p.b * (1.0 - p.alpha);
  r.C = p.sigma * p.sigma + 2.0 * g.c2 + g.c0 * g.d2 +
        plastic * plastic * (2.0 / g.c0 + g.c0 / (2.0 * (ka - g.d1)));
  r.C1 = std::min(g.c0 / 3.0, g.c0 * (ka - g.d1) / (2.0 * ka + g.c0 * g.d0 + g.c0 * g.c0 - 2.0 * g.c1));
  r.bound = r.C / r.C1;
  return r;
}

}  // namespace bepo
