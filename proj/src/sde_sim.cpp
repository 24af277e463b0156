#include "bepo/sde_sim.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <optional>
#include <ostream>

namespace bepo {

void SimConfig::validate() const {
  if (!(dt > 0) || !std::isfinite(dt)) throw InvalidSpec("sim.dt must be > 0");
  if (n_steps == 0) throw InvalidSpec("sim.n_steps must be > 0");
  if (burn_in >= n_steps) throw InvalidSpec("sim.burn_in must be < sim.n_steps");
  if (n_paths < 1) throw InvalidSpec("sim.n_paths must be >= 1");
  if (batches < 2) throw InvalidSpec("sim.batches must be >= 2");
}

PathNoise::PathNoise(std::uint64_t seed, std::size_t path, double dt) : sqrt_dt_(std::sqrt(dt)) {
  const std::uint64_t p = static_cast<std::uint64_t>(path);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(p >> 32), 0x6265706fU};
  engine_.seed(seq);
}

TrajectoryStats simulate_trajectory(const SimConfig& cfg, const ModelParams& p, std::span<Observer* const> observers,
                                    std::size_t path_index) {
  cfg.validate();
  p.validate();
  if (std::abs(cfg.init.z) > p.b) throw InvalidSpec("initial elastic deformation |z| exceeds b");

  TrajectoryStats st;
  st.path = path_index;
  PathNoise noise(cfg.seed, path_index, cfg.dt);
  Phase prev = phase_of(cfg.init.z, p.b);

  st.final = integrate_path(
      cfg.init, p, cfg.dt, cfg.n_steps, noise,
      [&](std::size_t n, const OscState& s) {
        const double t = static_cast<double>(n) * cfg.dt;
        if (s.phase != prev) {
          if (prev != Phase::Elastic) {
            ++st.exits;
            if (cfg.record_events)
              st.events.push_back({PhaseEvent::Kind::PlasticExit, t, prev == Phase::PlasticPlus ? 1 : -1});
          }
          if (s.phase != Phase::Elastic) {
            ++st.entries;
            if (cfg.record_events)
              st.events.push_back({PhaseEvent::Kind::PlasticEntry, t, s.phase == Phase::PlasticPlus ? 1 : -1});
          }
          prev = s.phase;
        }
        if (n > cfg.burn_in) {
          ++st.samples;
          for (Observer* o : observers) o->observe(t, s);
        }
      },
      path_index);
  st.steps = cfg.n_steps;
  return st;
}

// ---------------------------------------------------------------------------

namespace {

int sign_of(double d) { return d > 0 ? 1 : (d < 0 ? -1 : 0); }

Estimate mean_and_se(std::span<const double> values) {
  Estimate e;
  const std::size_t n = values.size();
  if (n == 0) return e;
  double s = 0.0;
  for (double v : values) s += v;
  e.value = s / static_cast<double>(n);
  if (n < 2) return e;
  double ss = 0.0;
  for (double v : values) ss += (v - e.value) * (v - e.value);
  e.se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  return e;
}

}  // namespace

double crossing_frequency_mc(std::span<const double> xs, double dt, double level) {
  if (xs.size() < 2) throw DegenerateInput("crossing frequency needs at least two samples");
  CrossingCounter c(level, dt, xs.size(), 2);
  for (double x : xs) c.add(x);
  return static_cast<double>(c.crossings()) / (static_cast<double>(xs.size() - 1) * dt);
}

double serviceability_mc(std::span<const double> xs, std::span<const double> zs, double radius) {
  if (radius < 0) throw NegativeBand("band radius must be >= 0");
  if (xs.empty() || xs.size() != zs.size()) throw DegenerateInput("serviceability needs matching, nonempty samples");
  std::size_t inside = 0;
  for (std::size_t q = 0; q < xs.size(); ++q)
    if (std::abs(xs[q] - zs[q]) <= radius) ++inside;
  return static_cast<double>(inside) / static_cast<double>(xs.size());
}

Estimate ergodic_average_mc(const Observable& g, std::span<const OscState> samples, std::size_t batches) {
  if (samples.empty()) throw DegenerateInput("ergodic average needs at least one sample");
  BatchMeans acc(samples.size(), batches);
  for (const OscState& s : samples) acc.add(g(s.x, s.y, s.z));
  return BatchMeans::combine(std::span<const BatchMeans>(&acc, 1));
}

BatchMeans::BatchMeans(std::size_t expected, std::size_t batches)
    : batch_len_(std::max<std::size_t>(1, expected / std::max<std::size_t>(1, batches))) {
  batch_means_.reserve(batches + 1);
}

void BatchMeans::add(double v) {
  ++count_;
  sum_ += v;
  batch_sum_ += v;
  if (++in_batch_ == batch_len_) {
    batch_means_.push_back(batch_sum_ / static_cast<double>(batch_len_));
    batch_sum_ = 0.0;
    in_batch_ = 0;
  }
}

Estimate BatchMeans::combine(std::span<const BatchMeans> parts) {
  double sum = 0.0;
  std::size_t count = 0;
  std::vector<double> means;
  for (const BatchMeans& b : parts) {
    sum += b.sum_;
    count += b.count_;
    means.insert(means.end(), b.batch_means_.begin(), b.batch_means_.end());
  }
  Estimate e;
  if (count == 0) return e;
  e.value = sum / static_cast<double>(count);
  e.se = mean_and_se(means).se;
  return e;
}

CrossingCounter::CrossingCounter(double level, double dt, std::size_t expected, std::size_t batches)
    : level_(level), dt_(dt), batch_len_(std::max<std::size_t>(1, (expected > 0 ? expected - 1 : 0) / batches)) {
  batch_rates_.reserve(batches + 1);
}

void CrossingCounter::add(double x) {
  const int s = sign_of(x - level_);
  if (samples_++ > 0) {
    ++batch_pairs_;
    if (s != 0 && last_sign_ != 0 && s != last_sign_) {
      ++crossings_;
      ++batch_crossings_;
    }
    if (batch_pairs_ == batch_len_) close_batch();
  }
  if (s != 0) last_sign_ = s;
}

void CrossingCounter::close_batch() {
  batch_rates_.push_back(static_cast<double>(batch_crossings_) / (static_cast<double>(batch_pairs_) * dt_));
  batch_crossings_ = 0;
  batch_pairs_ = 0;
}

Estimate CrossingCounter::combine(std::span<const CrossingCounter> parts) {
  std::size_t crossings = 0, pairs = 0;
  double dt = 1.0;
  std::vector<double> rates;
  for (const CrossingCounter& c : parts) {
    crossings += c.crossings_;
    pairs += c.samples_ > 0 ? c.samples_ - 1 : 0;
    dt = c.dt_;
    rates.insert(rates.end(), c.batch_rates_.begin(), c.batch_rates_.end());
  }
  Estimate e;
  if (pairs == 0) return e;
  e.value = static_cast<double>(crossings) / (static_cast<double>(pairs) * dt);
  e.se = mean_and_se(rates).se;
  return e;
}

StatsObserver::StatsObserver(const SimConfig& cfg, std::span<const double> crossing_levels,
                             std::span<const double> band_radii, std::span<const Observable> observables, double x_bar,
                             double y_bar)
    : radii_(band_radii.begin(), band_radii.end()),
      observables_(observables.begin(), observables.end()),
      x_bar_(x_bar),
      y_bar_(y_bar) {
  const std::size_t expected = cfg.n_steps - cfg.burn_in;
  for (double a : crossing_levels) crossing.emplace_back(a, cfg.dt, expected, cfg.batches);
  for (double r : radii_) {
    if (r < 0) throw NegativeBand("band radius must be >= 0");
    band.emplace_back(expected, cfg.batches);
  }
  for (std::size_t q = 0; q < observables_.size(); ++q) generic.emplace_back(expected, cfg.batches);
}

void StatsObserver::observe(double, const OscState& s) {
  ++samples;
  for (CrossingCounter& c : crossing) c.add(s.x);
  const double dev = std::abs(s.x - s.z);
  for (std::size_t q = 0; q < radii_.size(); ++q) band[q].add(dev <= radii_[q] ? 1.0 : 0.0);
  for (std::size_t q = 0; q < observables_.size(); ++q) generic[q].add(observables_[q](s.x, s.y, s.z));
  if (x_bar_ > 0 && (std::abs(s.x) > x_bar_ || std::abs(s.y) > y_bar_)) ++outside_box;
}

namespace {

struct PathResult {
  std::optional<StatsObserver> obs;
  TrajectoryStats stats;
};

MonteCarloSummary merge(const std::vector<PathResult>& paths, std::size_t nlevels, std::size_t nradii,
                        std::size_t nobs) {
  MonteCarloSummary out;
  std::size_t outside = 0;
  for (std::size_t a = 0; a < nlevels; ++a) {
    std::vector<CrossingCounter> parts;
    for (const PathResult& r : paths) parts.push_back(r.obs->crossing[a]);
    out.crossing.push_back(CrossingCounter::combine(parts));
  }
  for (std::size_t a = 0; a < nradii; ++a) {
    std::vector<BatchMeans> parts;
    for (const PathResult& r : paths) parts.push_back(r.obs->band[a]);
    out.band.push_back(BatchMeans::combine(parts));
  }
  for (std::size_t a = 0; a < nobs; ++a) {
    std::vector<BatchMeans> parts;
    for (const PathResult& r : paths) parts.push_back(r.obs->generic[a]);
    out.generic.push_back(BatchMeans::combine(parts));
  }
  for (const PathResult& r : paths) {
    out.samples += r.obs->samples;
    outside += r.obs->outside_box;
    out.entries += r.stats.entries;
    out.exits += r.stats.exits;
  }
  out.outside_fraction = out.samples ? static_cast<double>(outside) / static_cast<double>(out.samples) : 0.0;
  return out;
}

void run_one(PathResult& res, std::size_t path, const SimConfig& cfg, const ModelParams& p,
             std::span<const double> levels, std::span<const double> radii, std::span<const Observable> observables,
             double x_bar, double y_bar) {
  res.obs.emplace(cfg, levels, radii, observables, x_bar, y_bar);
  Observer* o = &*res.obs;
  res.stats = simulate_trajectory(cfg, p, std::span<Observer* const>(&o, 1), path);
}

}  // namespace

MonteCarloSummary run_monte_carlo(const SimConfig& cfg, const ModelParams& p, std::span<const double> crossing_levels,
                                  std::span<const double> band_radii, std::span<const Observable> observables,
                                  double x_bar, double y_bar) {
  cfg.validate();
  std::vector<PathResult> paths(cfg.n_paths);
  std::vector<std::exception_ptr> errors(cfg.n_paths);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t q = 0; q < static_cast<std::ptrdiff_t>(cfg.n_paths); ++q) {
    try {
      run_one(paths[static_cast<std::size_t>(q)], static_cast<std::size_t>(q), cfg, p, crossing_levels, band_radii,
              observables, x_bar, y_bar);
    } catch (...) {
      errors[static_cast<std::size_t>(q)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return merge(paths, crossing_levels.size(), band_radii.size(), observables.size());
}

MonteCarloSummary run_monte_carlo_serial(const SimConfig& cfg, const ModelParams& p,
                                         std::span<const double> crossing_levels, std::span<const double> band_radii,
                                         std::span<const Observable> observables, double x_bar, double y_bar) {
  cfg.validate();
  std::vector<PathResult> paths(cfg.n_paths);
  for (std::size_t q = 0; q < cfg.n_paths; ++q)
    run_one(paths[q], q, cfg, p, crossing_levels, band_radii, observables, x_bar, y_bar);
  return merge(paths, crossing_levels.size(), band_radii.size(), observables.size());
}

// ---------------------------------------------------------------------------

bool BoundReport::any_violation() const {
  return std::any_of(rows.begin(), rows.end(), [](const BoundRow& r) { return r.violated; });
}

BoundReport lyapunov_check_mc(const SimConfig& cfg, const ModelParams& p, const LyapunovReport& r,
                              std::span<const double> checkpoints) {
  cfg.validate();
  p.validate();
  if (checkpoints.empty()) throw DegenerateInput("no checkpoint times given");

  std::vector<std::size_t> at_step;
  for (double t : checkpoints) {
    if (!(t > 0)) throw InvalidSpec("checkpoint times must be > 0");
    at_step.push_back(static_cast<std::size_t>(std::llround(t / cfg.dt)));
  }
  const std::size_t last = *std::max_element(at_step.begin(), at_step.end());
  const std::size_t npaths = cfg.n_paths;
  const std::size_t ncp = at_step.size();

  std::vector<double> values(npaths * ncp, 0.0);
  std::vector<std::exception_ptr> errors(npaths);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t q = 0; q < static_cast<std::ptrdiff_t>(npaths); ++q) {
    const std::size_t path = static_cast<std::size_t>(q);
    try {
      PathNoise noise(cfg.seed, path, cfg.dt);
      integrate_path(
          cfg.init, p, cfg.dt, last, noise,
          [&](std::size_t n, const OscState& s) {
            for (std::size_t c = 0; c < ncp; ++c)
              if (at_step[c] == n) values[path * ncp + c] = lyapunov_value(s.x, s.y, r);
          },
          path);
    } catch (...) {
      errors[path] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  BoundReport rep;
  rep.v0 = lyapunov_value(cfg.init.x, cfg.init.y, r);
  rep.bound = rep.v0 + r.bound;
  std::vector<double> column(npaths);
  for (std::size_t c = 0; c < ncp; ++c) {
    for (std::size_t q = 0; q < npaths; ++q) column[q] = values[q * ncp + c];
    const Estimate e = mean_and_se(column);
    rep.rows.push_back({checkpoints[c], e.value, e.se, rep.bound, e.value - 3.0 * e.se > rep.bound});
  }
  return rep;
}

void dump_trajectory_csv(std::ostream& os, const SimConfig& cfg, const ModelParams& p, std::size_t stride) {
  cfg.validate();
  if (stride == 0) stride = 1;
  static constexpr const char* names[] = {"elastic", "plastic+", "plastic-"};
  char buf[160];
  auto row = [&](double t, const OscState& s) {
    std::snprintf(buf, sizeof buf, "%.10g,%.12g,%.12g,%.12g,%s\n", t, s.x, s.y, s.z,
                  names[static_cast<int>(s.phase)]);
    os << buf;
  };
  os << "t,x,y,z,phase\n";
  OscState init = cfg.init;
  init.phase = phase_of(init.z, p.b);
  row(0.0, init);
  PathNoise noise(cfg.seed, 0, cfg.dt);
  integrate_path(init, p, cfg.dt, cfg.n_steps, noise, [&](std::size_t n, const OscState& s) {
    if (n % stride == 0) row(static_cast<double>(n) * cfg.dt, s);
  });
}

}  // namespace bepo
