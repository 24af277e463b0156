#pragma once

// Run configuration: a `key = value` document with dotted sections.
//
//   # comment
//   experiment = crossing-sweep
//   sweep = [-1, 0, 1]
//   model.alpha = 0.5
//   [solver]            # following keys are read as solver.<key>
//   drop_tol = 1e-6
//
// Every key has a default (the Example-1 settings), unknown keys are errors.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "bepo/convergence.hpp"
#include "bepo/grid.hpp"
#include "bepo/model.hpp"
#include "bepo/observables.hpp"
#include "bepo/sde_sim.hpp"
#include "bepo/solver.hpp"

namespace bepo {

enum class Experiment { Solve, Simulate, CrossingSweep, ServiceabilitySweep, Convergence, CrossValidate };

std::string_view to_string(Experiment e);
Experiment experiment_from_string(std::string_view s);  // throws InvalidSpec

/// Which g the solve / simulate / convergence experiments use.
struct ObservableSpec {
  enum class Kind { CrossingSpeed, PlasticBand, Constant };
  Kind kind = Kind::PlasticBand;
  double level = 0.0;   // crossing level a1
  double radius = 1.0;  // band half-width a2
  double value = 1.0;   // constant
  double eps0 = 0.0;    // mollifier width (unscaled); 0 selects default_eps0(grid)

  Observable build(const GridSpec& grid) const;
  double resolved_eps0(const GridSpec& grid) const { return eps0 > 0 ? eps0 : default_eps0(grid); }
  friend bool operator==(const ObservableSpec&, const ObservableSpec&) = default;
};

struct ConvergenceSpec {
  std::vector<Axis> axes{Axis::X, Axis::Y, Axis::Z};
  int refinements = 2;
  bool skip_y_boundary = false;
  friend bool operator==(const ConvergenceSpec&, const ConvergenceSpec&) = default;
};

/// PDE-versus-Monte-Carlo comparison and its pass rule:
///   crossing: |pde - mc| <= max(crossing_rel * mc, se_factor * se)
///   band:     |pde - mc| <= max(band_abs, se_factor * se)
struct CrossValidateSpec {
  std::vector<double> levels{-1.0, 0.0, 1.0};
  std::vector<double> radii{0.5, 1.5, 2.5};
  double crossing_rel = 0.1;
  double band_abs = 0.05;
  double se_factor = 3.0;
  friend bool operator==(const CrossValidateSpec&, const CrossValidateSpec&) = default;
};

/// Expected-energy check run by `simulate` when paths > 0.
struct LyapunovSpec {
  std::size_t paths = 0;
  std::vector<double> checkpoints{1.0, 5.0, 10.0, 50.0, 100.0};
  friend bool operator==(const LyapunovSpec&, const LyapunovSpec&) = default;
};

struct RunConfig {
  ModelParams model{};
  GridSpec grid{};  // grid.b always equals model.b
  SolverConfig solver{};
  SimConfig sim{};
  Experiment experiment = Experiment::Solve;
  std::vector<double> sweep;  // a1 or a2 values
  ObservableSpec observable{};
  ConvergenceSpec convergence{};
  CrossValidateSpec cross{};
  LyapunovSpec lyapunov{};
  bool monte_carlo = true;         // sweeps: also estimate by simulation
  std::size_t dump_stride = 0;     // simulate: trajectory CSV every n steps (0 = none)
  bool write_solution = true;      // solve: write the full solution CSV
  bool plot_script = true;         // sweeps: write a matplotlib script next to the CSV
  std::string output_dir = "bepo-out";

  /// Throws ValidationError naming the violated invariant.
  void validate() const;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Throws ParseError (line, key) on syntax errors, unknown keys and malformed
/// values, ValidationError when the parsed configuration violates an invariant.
RunConfig parse_config(std::string_view text);

/// Every key with its resolved value; parse_config(serialize(c)) == c.
std::string serialize(const RunConfig& c);

}  // namespace bepo
