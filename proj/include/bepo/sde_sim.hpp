#pragma once

// Monte Carlo for the stochastic variational inequality
//   dX = Y dt,  dY = beta(X, Y, Z) dt + sigma dW,  (dZ - Y dt)(xi - Z) >= 0 for |xi| <= b,
// discretized by explicit Euler-Maruyama with Z projected onto [-b, b].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "bepo/errors.hpp"
#include "bepo/model.hpp"
#include "bepo/observables.hpp"

namespace bepo {

enum class Phase { Elastic, PlasticPlus, PlasticMinus };

inline Phase phase_of(double z, double b) {
  if (z == b) return Phase::PlasticPlus;
  if (z == -b) return Phase::PlasticMinus;
  return Phase::Elastic;
}

struct OscState {
  double x = 0, y = 0, z = 0;
  Phase phase = Phase::Elastic;

  double plastic() const { return x - z; }
  friend bool operator==(const OscState&, const OscState&) = default;
};

struct SimConfig {
  double dt = 1e-3;
  std::size_t n_steps = 1'000'000;
  std::size_t burn_in = 10'000;
  std::uint64_t seed = 20240901;
  std::size_t n_paths = 1;
  OscState init{};
  std::size_t batches = 50;  // batch-means standard errors
  bool record_events = false;

  void validate() const;  // throws InvalidSpec
  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct PhaseEvent {
  enum class Kind { PlasticEntry, PlasticExit };
  Kind kind;
  double time;
  int side;  // +1 for z = b, -1 for z = -b
};

inline OscState step_euler(const OscState& s, double dt, double dW, const ModelParams& p) {
  OscState n;
  n.x = s.x + s.y * dt;
  n.y = s.y + drift_beta(s.x, s.y, s.z, p) * dt + p.sigma * dW;
  n.z = std::clamp(s.z + s.y * dt, -p.b, p.b);
  n.phase = phase_of(n.z, p.b);
  return n;
}

/// Per-path generator of Brownian increments. Each (seed, path) pair gets its
/// own engine, so results do not depend on how paths are scheduled.
class PathNoise {
 public:
  PathNoise(std::uint64_t seed, std::size_t path, double dt);
  double operator()() { return sqrt_dt_ * normal_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  double sqrt_dt_;
};

/// Core loop: n_steps Euler steps from `init`; visit(step, state) is called for
/// every produced state (steps 1..n_steps). Throws NonFiniteState.
template <class Noise, class Visit>
OscState integrate_path(const OscState& init, const ModelParams& p, double dt, std::size_t n_steps, Noise&& noise,
                        Visit&& visit, std::size_t path_index = 0) {
  OscState s = init;
  s.phase = phase_of(s.z, p.b);
  for (std::size_t n = 1; n <= n_steps; ++n) {
    s = step_euler(s, dt, noise(), p);
    if (!std::isfinite(s.x) || !std::isfinite(s.y)) throw NonFiniteState(path_index, n);
    visit(n, s);
  }
  return s;
}

/// Per-trajectory consumer of post-burn-in states.
class Observer {
 public:
  virtual ~Observer() = default;
  virtual void observe(double t, const OscState& s) = 0;
};

struct TrajectoryStats {
  std::size_t path = 0;
  std::size_t steps = 0;
  std::size_t samples = 0;  // states passed to observers
  OscState final{};
  std::vector<PhaseEvent> events;
  std::size_t entries = 0;
  std::size_t exits = 0;
};

/// One path: `path_index` selects the noise stream. Identical (seed, path_index)
/// gives a bit-identical trajectory.
TrajectoryStats simulate_trajectory(const SimConfig& cfg, const ModelParams& p, std::span<Observer* const> observers,
                                    std::size_t path_index = 0);

// ---------------------------------------------------------------------------
// Estimators on stored samples.

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

/// Sign changes of x - level between consecutive samples per unit time,
/// T = (N - 1) dt. A sample exactly at the level keeps the previous sign.
double crossing_frequency_mc(std::span<const double> xs, double dt, double level);

/// Fraction of samples with |x - z| <= radius.
double serviceability_mc(std::span<const double> xs, std::span<const double> zs, double radius);

/// Time average of g with a batch-means standard error.
Estimate ergodic_average_mc(const Observable& g, std::span<const OscState> samples, std::size_t batches = 50);

// ---------------------------------------------------------------------------
// Streaming accumulators (one per path; merge in path order).

/// Batch means over a stream of known length.
class BatchMeans {
 public:
  BatchMeans() = default;
  BatchMeans(std::size_t expected, std::size_t batches);
  void add(double v);
  /// Pooled estimate over several accumulators, in the given order.
  static Estimate combine(std::span<const BatchMeans> parts);
  std::size_t count() const { return count_; }
  double sum() const { return sum_; }

 private:
  std::size_t batch_len_ = 1;
  std::size_t count_ = 0;
  double sum_ = 0.0;
  double batch_sum_ = 0.0;
  std::size_t in_batch_ = 0;
  std::vector<double> batch_means_;
};

/// Crossing counter over a stream with per-batch rates for the standard error.
class CrossingCounter {
 public:
  CrossingCounter() = default;
  CrossingCounter(double level, double dt, std::size_t expected, std::size_t batches);
  void add(double x);
  std::size_t crossings() const { return crossings_; }
  std::size_t samples() const { return samples_; }
  /// Pooled crossings / pooled time, with batch-means standard error.
  static Estimate combine(std::span<const CrossingCounter> parts);

 private:
  void close_batch();

  double level_ = 0.0;
  double dt_ = 1.0;
  std::size_t batch_len_ = 1;
  int last_sign_ = 0;
  std::size_t crossings_ = 0;
  std::size_t samples_ = 0;
  std::size_t batch_crossings_ = 0;
  std::size_t batch_pairs_ = 0;
  std::vector<double> batch_rates_;
};

/// Observer evaluating a set of observables, crossing levels and band radii on
/// one path.
class StatsObserver final : public Observer {
 public:
  StatsObserver(const SimConfig& cfg, std::span<const double> crossing_levels, std::span<const double> band_radii,
                std::span<const Observable> observables, double x_bar = 0, double y_bar = 0);
  void observe(double t, const OscState& s) override;

  std::vector<CrossingCounter> crossing;
  std::vector<BatchMeans> band;
  std::vector<BatchMeans> generic;
  std::size_t outside_box = 0;  // samples with |x| > x_bar or |y| > y_bar
  std::size_t samples = 0;

 private:
  std::vector<double> radii_;
  std::vector<Observable> observables_;
  double x_bar_, y_bar_;
};

struct MonteCarloSummary {
  std::vector<Estimate> crossing;  // per level
  std::vector<Estimate> band;      // per radius, nondecreasing in radius
  std::vector<Estimate> generic;   // per observable
  double outside_fraction = 0.0;
  std::size_t samples = 0;
  std::size_t entries = 0;
  std::size_t exits = 0;
};

/// All paths in parallel (OpenMP), merged in path order.
MonteCarloSummary run_monte_carlo(const SimConfig& cfg, const ModelParams& p, std::span<const double> crossing_levels,
                                  std::span<const double> band_radii, std::span<const Observable> observables = {},
                                  double x_bar = 0, double y_bar = 0);
/// Serial reference of run_monte_carlo; identical results.
MonteCarloSummary run_monte_carlo_serial(const SimConfig& cfg, const ModelParams& p,
                                         std::span<const double> crossing_levels, std::span<const double> band_radii,
                                         std::span<const Observable> observables = {}, double x_bar = 0,
                                         double y_bar = 0);

// ---------------------------------------------------------------------------

struct BoundRow {
  double t = 0;
  double mean = 0;
  double se = 0;
  double bound = 0;
  bool violated = false;
};

struct BoundReport {
  double v0 = 0;  // V at the initial state
  double bound = 0;
  std::vector<BoundRow> rows;
  bool any_violation() const;
};

/// Cross-path mean of V(X(t), Y(t)) at each checkpoint time, compared against
/// V(init) + C/C1. Paths run in parallel; burn-in is ignored (t counts from 0).
BoundReport lyapunov_check_mc(const SimConfig& cfg, const ModelParams& p, const LyapunovReport& r,
                              std::span<const double> checkpoints);

/// `t,x,y,z,phase` every `stride` steps of path 0 (from t = 0).
void dump_trajectory_csv(std::ostream& os, const SimConfig& cfg, const ModelParams& p, std::size_t stride);

}  // namespace bepo
