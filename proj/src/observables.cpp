#include "bepo/observables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "bepo/errors.hpp"

namespace bepo {

Observable Observable::crossing_speed(double level, double eps0) {
  if (!(eps0 > 0) || !std::isfinite(eps0)) throw InvalidWidth("mollifier width eps0 must be > 0");
  Observable g;
  g.kind_ = Kind::CrossingSpeed;
  g.level_ = level;
  g.eps0_ = eps0;
  g.norm_ = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * eps0);
  return g;
}

Observable Observable::plastic_band(double radius) {
  if (radius < 0 || std::isnan(radius)) throw NegativeBand("band radius must be >= 0");
  Observable g;
  g.kind_ = Kind::PlasticBand;
  g.radius_ = radius;
  return g;
}

Observable Observable::constant(double c) {
  Observable g;
  g.kind_ = Kind::Constant;
  g.c_ = c;
  return g;
}

Observable Observable::tabulated(const GridSpec& spec, std::vector<double> values) {
  spec.validate();
  if (values.size() != static_cast<std::size_t>(spec.I) * spec.J * spec.K)
    throw ShapeMismatch("tabulated observable does not match the grid size");
  Observable g;
  g.kind_ = Kind::Custom;
  g.table_spec_ = spec;
  g.table_ = std::move(values);
  return g;
}

double Observable::operator()(double x, double y, double z) const {
  switch (kind_) {
    case Kind::CrossingSpeed: {
      const double d = (x - level_) / eps0_;
      return std::abs(y) * norm_ * std::exp(-0.5 * d * d);
    }
    case Kind::PlasticBand:
      return std::abs(x - z) <= radius_ ? 1.0 : 0.0;
    case Kind::Constant:
      return c_;
    case Kind::Custom: {
      const GridSpec& s = table_spec_;
      auto nearest = [](double u, double half, int n) {
        const double t = (u + half) / (2.0 * half) * (n - 1);
        return std::clamp(static_cast<int>(std::lround(t)), 0, n - 1);
      };
      const std::size_t i = static_cast<std::size_t>(nearest(x, s.x_bar, s.I));
      const std::size_t j = static_cast<std::size_t>(nearest(y, s.y_bar, s.J));
      const std::size_t k = static_cast<std::size_t>(nearest(z, s.b, s.K));
      return table_[k + j * s.K + i * static_cast<std::size_t>(s.J) * s.K];
    }
  }
  return 0.0;
}

std::optional<double> Observable::sup_norm(const GridSpec& spec) const {
  switch (kind_) {
    case Kind::CrossingSpeed: return spec.y_bar * norm_;
    case Kind::PlasticBand: return 1.0;
    case Kind::Constant: return std::abs(c_);
    case Kind::Custom: return std::nullopt;
  }
  return std::nullopt;
}

std::vector<std::string> Observable::warnings(const Grid& grid) const {
  std::vector<std::string> out;
  char buf[256];
  const GridSpec& s = grid.spec();
  if (kind_ == Kind::CrossingSpeed) {
    const double cell = 2.0 * s.x_bar / (s.I - 1);  // unscaled x spacing, free of the lambda round trip
    if (eps0_ < 2.0 * cell) {
      std::snprintf(buf, sizeof buf,
                    "mollifier width eps0=%.4g is below two x-cells (%.4g); the Gaussian is under-resolved", eps0_,
                    2.0 * cell);
      out.emplace_back(buf);
    }
    if (std::abs(level_) > s.x_bar) {
      std::snprintf(buf, sizeof buf, "crossing level %.4g lies outside the truncated box |x| <= %.4g", level_,
                    s.x_bar);
      out.emplace_back(buf);
    }
  }
  if (kind_ == Kind::Custom) out.emplace_back("tabulated observable: sup-norm diagnostics are skipped");
  return out;
}

std::string Observable::describe() const {
  char buf[128];
  switch (kind_) {
    case Kind::CrossingSpeed: std::snprintf(buf, sizeof buf, "crossing_speed(a1=%g, eps0=%g)", level_, eps0_); break;
    case Kind::PlasticBand: std::snprintf(buf, sizeof buf, "plastic_band(a2=%g)", radius_); break;
    case Kind::Constant: std::snprintf(buf, sizeof buf, "constant(%g)", c_); break;
    case Kind::Custom: std::snprintf(buf, sizeof buf, "tabulated(%dx%dx%d)", table_spec_.I, table_spec_.J, table_spec_.K); break;
  }
  return buf;
}

}  // namespace bepo
