#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bepo/grid.hpp"
#include "bepo/model.hpp"
#include "bepo/observables.hpp"
#include "bepo/solver.hpp"

namespace bepo {

enum class Axis { X, Y, Z };

std::string_view to_string(Axis a);
Axis axis_from_string(std::string_view s);  // throws InvalidSpec

/// Node count on `axis` goes n -> 2n - 1; every coarse node stays a node.
GridSpec refine_nested(const GridSpec& spec, Axis axis);

/// Max |coarse - fine| over the coarse nodes, each compared with the fine node
/// at the same coordinates. `fine` must equal `coarse` refined 0 or more times
/// along a single axis. With `skip_y_boundary` the zero-flux rows j = 1, J are
/// left out. Throws ShapeMismatch.
double sup_diff_on_common(std::span<const double> coarse, std::span<const double> fine, const GridSpec& coarse_spec,
                          const GridSpec& fine_spec, bool skip_y_boundary = false);

/// log2(d1 / d2). Throws DegenerateDifference on non-positive or non-finite input.
double empirical_order(double d1, double d2);

struct ConvergenceRow {
  Axis axis;
  int level;                   // pair (level-1, level)
  double h;                    // scaled spacing of the coarser grid of the pair
  double diff;                 // lambda ||u^h - u^{h/2}||_inf
  std::optional<double> order; // log2(diff(h) / diff(h/2)) when the next pair exists
};

/// Solves on base, base refined once, ..., `refinements` times along `axis`
/// and reports successive sup-norm differences and orders.
std::vector<ConvergenceRow> run_ladder(const GridSpec& base, Axis axis, int refinements, const ModelParams& p,
                                       const Observable& g, const SolverConfig& cfg, bool skip_y_boundary = false);

void write_convergence_csv(std::ostream& os, std::span<const ConvergenceRow> rows);

}  // namespace bepo
