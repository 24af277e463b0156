#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bepo/grid.hpp"

namespace bepo {

/// Scalar field g(x, y, z) in unscaled coordinates, shared by the resolvent
/// solve (as right-hand side) and the Monte Carlo time averages.
class Observable {
 public:
  enum class Kind { CrossingSpeed, PlasticBand, Constant, Custom };

  /// |y| times a Gaussian of width eps0 centred at x = level; mollifies |y| delta(x - level).
  static Observable crossing_speed(double level, double eps0);
  /// Indicator of the closed band |x - z| <= radius.
  static Observable plastic_band(double radius);
  static Observable constant(double c);
  /// Node values on `spec` (storage order of Grid::offset). Evaluation off the
  /// nodes uses the nearest node inside the box.
  static Observable tabulated(const GridSpec& spec, std::vector<double> values);

  Kind kind() const { return kind_; }
  double level() const { return level_; }
  double eps0() const { return eps0_; }
  double radius() const { return radius_; }
  double value() const { return c_; }

  double operator()(double x, double y, double z) const;

  /// sup |g| over the truncated box of `spec`; empty for tabulated observables.
  std::optional<double> sup_norm(const GridSpec& spec) const;

  /// Diagnostics for using this observable on `grid`: mollifier narrower than two
  /// x-cells, crossing level outside the box, tabulated values. Empty when fine.
  std::vector<std::string> warnings(const Grid& grid) const;

  std::string describe() const;

 private:
  Observable() = default;

  Kind kind_ = Kind::Constant;
  double level_ = 0.0;
  double eps0_ = 1.0;
  double radius_ = 0.0;
  double c_ = 0.0;
  double norm_ = 0.0;  // 1 / (sqrt(2 pi) eps0)
  GridSpec table_spec_{};
  std::vector<double> table_;
};

/// Unscaled mollifier width matching the default choice eps0~ = lambda x_bar / 64
/// in scaled coordinates.
inline double default_eps0(const GridSpec& spec) { return spec.x_bar / 64.0; }

}  // namespace bepo
