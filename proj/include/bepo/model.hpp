#pragma once

// Bilinear elasto-plastic oscillator: physical parameters, the drift of the
// velocity equation and the quadratic Lyapunov function bounding E[V(X,Y)].

namespace bepo {

/// Affine non-elastoplastic force f(x, y) = -damping*y + stiffness_x*x + offset.
struct ForceSpec {
  double damping = 1.0;      // c0 > 0 for the Lyapunov route
  double stiffness_x = 0.0;  // coefficient of x
  double offset = 0.0;       // constant term

  double operator()(double x, double y) const { return -damping * y + stiffness_x * x + offset; }
  bool is_odd() const { return offset == 0.0; }
  friend bool operator==(const ForceSpec&, const ForceSpec&) = default;
};

struct ModelParams {
  double k = 1.0;      // stiffness
  double alpha = 0.5;  // bilinearity ratio in [0, 1]; 0 is the perfectly plastic case
  double b = 1.0;      // elasto-plastic bound on |z|
  double sigma = 1.0;  // noise intensity
  ForceSpec force{};

  /// Throws ValidationError naming the first violated constraint.
  void validate() const;
  friend bool operator==(const ModelParams&, const ModelParams&) = default;

};

/// beta(x, y, z) = f(x, y) - k(1-alpha) z - k alpha x. No clamping of z.
inline double drift_beta(double x, double y, double z, const ModelParams& p) {
  return p.force(x, y) - p.k * (1.0 - p.alpha) * z - p.k * p.alpha * x;
}

/// Constants of the one-sided growth bounds on f, derived from ForceSpec:
///   y f(x,y) <= -c0 y^2 + c1 x y + c2,   x f(x,y) <= -d0 x y + d1 x^2 + d2.
struct GrowthConstants {
  double c0 = 0, c1 = 0, c2 = 0;
  double d0 = 0, d1 = 0, d2 = 0;
};

struct LyapunovReport {
  GrowthConstants growth;
  // V(x, y) = vxx x^2 + vyy y^2 + vxy x y
  double vxx = 0, vyy = 1, vxy = 0;
  double C = 0;   // energy constant
  double C1 = 0;  // decay rate
  double bound = 0;  // C / C1
};

/// Throws AssumptionViolation when the growth bounds cannot hold
/// (c0 <= 0, c1 > k alpha or d1 >= k alpha).
GrowthConstants growth_constants(const ModelParams& p);

LyapunovReport lyapunov_constants(const ModelParams& p);

inline double lyapunov_value(double x, double y, const LyapunovReport& r) {
  return r.vxx * x * x + r.vyy * y * y + r.vxy * x * y;
}

}  // namespace bepo
