#include "bepo/convergence.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <ostream>
#include <string>

#include "bepo/assembly.hpp"
#include "bepo/errors.hpp"

namespace bepo {

std::string_view to_string(Axis a) {
  switch (a) {
    case Axis::X: return "x";
    case Axis::Y: return "y";
    case Axis::Z: return "z";
  }
  return "?";
}

Axis axis_from_string(std::string_view s) {
  if (s == "x") return Axis::X;
  if (s == "y") return Axis::Y;
  if (s == "z") return Axis::Z;
  throw InvalidSpec("unknown axis '" + std::string(s) + "' (expected x, y or z)");
}

GridSpec refine_nested(const GridSpec& spec, Axis axis) {
  spec.validate();
  GridSpec out = spec;
  int& n = axis == Axis::X ? out.I : axis == Axis::Y ? out.J : out.K;
  n = 2 * n - 1;
  return out;
}

namespace {

// Returns the stride s with fine = s (coarse - 1) + 1, s a power of two, or 0.
int nesting_stride(int coarse, int fine) {
  if ((fine - 1) % (coarse - 1) != 0) return 0;
  const int s = (fine - 1) / (coarse - 1);
  return (s > 0 && (s & (s - 1)) == 0) ? s : 0;
}

}  // namespace

double sup_diff_on_common(std::span<const double> coarse, std::span<const double> fine, const GridSpec& cs,
                          const GridSpec& fs, bool skip_y_boundary) {
  cs.validate();
  fs.validate();
  if (cs.lambda != fs.lambda || cs.x_bar != fs.x_bar || cs.y_bar != fs.y_bar || cs.b != fs.b)
    throw ShapeMismatch("grids differ in lambda or truncation box");
  const int si = nesting_stride(cs.I, fs.I), sj = nesting_stride(cs.J, fs.J), sk = nesting_stride(cs.K, fs.K);
  if (si == 0 || sj == 0 || sk == 0) throw ShapeMismatch("fine grid is not a nested refinement of the coarse grid");
  if ((si > 1) + (sj > 1) + (sk > 1) > 1) throw ShapeMismatch("refinement must be along a single axis");
  if (coarse.size() != static_cast<std::size_t>(cs.I) * cs.J * cs.K ||
      fine.size() != static_cast<std::size_t>(fs.I) * fs.J * fs.K)
    throw ShapeMismatch("field length does not match its grid");

  double d = 0.0;
  for (int i = 1; i <= cs.I; ++i)
    for (int j = 1; j <= cs.J; ++j) {
      if (skip_y_boundary && (j == 1 || j == cs.J)) continue;
      for (int k = 1; k <= cs.K; ++k) {
        const std::size_t c = index_of(i, j, k, cs.I, cs.J, cs.K) - 1;
        const std::size_t f =
            index_of(si * (i - 1) + 1, sj * (j - 1) + 1, sk * (k - 1) + 1, fs.I, fs.J, fs.K) - 1;
        d = std::max(d, std::abs(coarse[c] - fine[f]));
      }
    }
  return d;
}

double empirical_order(double d1, double d2) {
  if (!std::isfinite(d1) || !std::isfinite(d2) || !(d1 > 0) || !(d2 > 0))
    throw DegenerateDifference("order estimate needs two positive, finite differences");
  return std::log2(d1 / d2);
}

std::vector<ConvergenceRow> run_ladder(const GridSpec& base, Axis axis, int refinements, const ModelParams& p,
                                       const Observable& g, const SolverConfig& cfg, bool skip_y_boundary) {
  if (refinements < 1) throw InvalidSpec("a ladder needs at least one refinement");
  std::vector<GridSpec> specs{base};
  for (int l = 0; l < refinements; ++l) specs.push_back(refine_nested(specs.back(), axis));

  std::vector<std::vector<double>> fields(specs.size());
  std::vector<std::exception_ptr> errors(specs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t l = 0; l < static_cast<std::ptrdiff_t>(specs.size()); ++l) {
    try {
      const Grid grid(specs[static_cast<std::size_t>(l)]);
      fields[static_cast<std::size_t>(l)] = solve_resolvent(assemble_system(grid, p, g), grid, cfg).v;
    } catch (...) {
      errors[static_cast<std::size_t>(l)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<ConvergenceRow> rows;
  for (std::size_t l = 1; l < specs.size(); ++l) {
    const Grid coarse(specs[l - 1]);
    const double h = axis == Axis::X ? coarse.dx() : axis == Axis::Y ? coarse.dy() : coarse.dz();
    rows.push_back({axis, static_cast<int>(l), h,
                    sup_diff_on_common(fields[l - 1], fields[l], specs[l - 1], specs[l], skip_y_boundary),
                    std::nullopt});
  }
  for (std::size_t r = 0; r + 1 < rows.size(); ++r) {
    try {
      rows[r].order = empirical_order(rows[r].diff, rows[r + 1].diff);
    } catch (const DegenerateDifference&) {
    }
  }
  return rows;
}

void write_convergence_csv(std::ostream& os, std::span<const ConvergenceRow> rows) {
  os << "axis,level,h,diff,order\n";
  char buf[160];
  for (const ConvergenceRow& r : rows) {
    if (r.order)
      std::snprintf(buf, sizeof buf, "%s,%d,%.6e,%.6e,%.4f\n", std::string(to_string(r.axis)).c_str(), r.level, r.h,
                    r.diff, *r.order);
    else
      std::snprintf(buf, sizeof buf, "%s,%d,%.6e,%.6e,\n", std::string(to_string(r.axis)).c_str(), r.level, r.h,
                    r.diff);
    os << buf;
  }
}

}  // namespace bepo
