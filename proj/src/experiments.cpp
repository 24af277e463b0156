#include "bepo/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bepo/assembly.hpp"
#include "bepo/convergence.hpp"
#include "bepo/errors.hpp"
#include "bepo/parallel.hpp"
#include "bepo/solver.hpp"

namespace bepo {

namespace {

using nlohmann::json;

std::string node_text(const Grid& g, NodeIndex n) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "node (%d,%d,%d) at x=%.4g y=%.4g z=%.4g", n.i, n.j, n.k, g.x(n.i), g.y(n.j),
                g.z(n.k));
  return buf;
}

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// One factorization, one solve per observable (in parallel, rows in input order).
std::vector<SweepRow> pde_rows(const RunConfig& cfg, const std::vector<double>& levels,
                               const std::vector<Observable>& observables, std::vector<std::string>& warnings) {
  const Grid grid(cfg.grid);
  const ResolventSolver solver(assemble_matrix(grid, cfg.model, grid.lambda()), grid, cfg.solver);
  if (solver.shifted()) warnings.push_back("incomplete factorization needed the diagonal-shift retry");

  std::vector<SweepRow> rows(observables.size());
  std::vector<std::vector<std::string>> row_warnings(observables.size());
  std::vector<std::exception_ptr> errors(observables.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t q = 0; q < static_cast<std::ptrdiff_t>(observables.size()); ++q) {
    const std::size_t r = static_cast<std::size_t>(q);
    try {
      const Observable& g = observables[r];
      const std::vector<double> rhs = assemble_rhs(grid, g);
      const SolveReport rep = solver.solve(rhs);
      const BoundednessCheck b = check_boundedness(rep.v, rhs, grid);
      rows[r] = {levels[r], rep.statistic, std::nullopt, rep.spread, rep.rel_residual, rep.iterations, rep.max_abs,
                 b.ok};
      for (const auto& w : g.warnings(grid)) row_warnings[r].push_back(g.describe() + ": " + w);
      if (!b.ok)
        row_warnings[r].push_back(g.describe() + ": max |v| = " + number(b.max_v) + " exceeds 1.05 sup |g| = " +
                                  number(1.05 * b.max_g) + " at " + node_text(grid, b.worst));
    } catch (...) {
      errors[r] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (const auto& w : row_warnings) warnings.insert(warnings.end(), w.begin(), w.end());
  return rows;
}

void note_outside(double fraction, std::vector<std::string>& warnings) {
  if (fraction > 1e-3)
    warnings.push_back("Monte Carlo path spends " + number(100.0 * fraction) +
                       "% of its time outside the truncated box; the PDE route cannot see that mass");
}

std::vector<Observable> crossing_observables(const RunConfig& cfg, const std::vector<double>& levels) {
  std::vector<Observable> out;
  for (double a : levels) out.push_back(Observable::crossing_speed(a, cfg.observable.resolved_eps0(cfg.grid)));
  return out;
}

std::vector<Observable> band_observables(const std::vector<double>& radii) {
  std::vector<Observable> out;
  for (double a : radii) out.push_back(Observable::plastic_band(a));
  return out;
}

}  // namespace

SweepTable run_crossing_sweep(const RunConfig& cfg) {
  cfg.validate();
  SweepTable t;
  t.kind = Experiment::CrossingSweep;
  t.rows = pde_rows(cfg, cfg.sweep, crossing_observables(cfg, cfg.sweep), t.warnings);
  if (cfg.monte_carlo) {
    const MonteCarloSummary mc =
        run_monte_carlo(cfg.sim, cfg.model, cfg.sweep, {}, {}, cfg.grid.x_bar, cfg.grid.y_bar);
    for (std::size_t r = 0; r < t.rows.size(); ++r) t.rows[r].mc = mc.crossing[r];
    t.outside_fraction = mc.outside_fraction;
    note_outside(mc.outside_fraction, t.warnings);
  }
  return t;
}

SweepTable run_serviceability_sweep(const RunConfig& cfg) {
  cfg.validate();
  SweepTable t;
  t.kind = Experiment::ServiceabilitySweep;
  t.rows = pde_rows(cfg, cfg.sweep, band_observables(cfg.sweep), t.warnings);
  if (cfg.monte_carlo) {
    const MonteCarloSummary mc = run_monte_carlo(cfg.sim, cfg.model, {}, cfg.sweep, {}, cfg.grid.x_bar, cfg.grid.y_bar);
    for (std::size_t r = 0; r < t.rows.size(); ++r) t.rows[r].mc = mc.band[r];
    t.outside_fraction = mc.outside_fraction;
    note_outside(mc.outside_fraction, t.warnings);
  }
  return t;
}

void write_sweep_csv(std::ostream& os, const SweepTable& t) {
  os << (t.kind == Experiment::CrossingSweep ? "a1,nu_pde,nu_mc,nu_mc_se,spread,residual\n"
                                              : "a2,P_pde,P_mc,P_mc_se,spread,residual\n");
  char buf[256];
  for (const SweepRow& r : t.rows) {
    if (r.mc)
      std::snprintf(buf, sizeof buf, "%.6g,%.10e,%.10e,%.4e,%.4e,%.4e\n", r.level, r.pde, r.mc->value, r.mc->se,
                    r.spread, r.residual);
    else
      std::snprintf(buf, sizeof buf, "%.6g,%.10e,,,%.4e,%.4e\n", r.level, r.pde, r.spread, r.residual);
    os << buf;
  }
}

bool CrossReport::all_pass() const {
  return band_monotone && std::all_of(rows.begin(), rows.end(), [](const CrossRow& r) { return r.pass; });
}

CrossReport run_cross_validate(const RunConfig& cfg) {
  cfg.validate();
  CrossReport rep;
  const auto& levels = cfg.cross.levels;
  const auto& radii = cfg.cross.radii;

  std::vector<double> all_levels = levels;
  all_levels.insert(all_levels.end(), radii.begin(), radii.end());
  std::vector<Observable> all = crossing_observables(cfg, levels);
  for (auto& g : band_observables(radii)) all.push_back(std::move(g));
  const std::vector<SweepRow> pde = pde_rows(cfg, all_levels, all, rep.warnings);

  const MonteCarloSummary mc = run_monte_carlo(cfg.sim, cfg.model, levels, radii, {}, cfg.grid.x_bar, cfg.grid.y_bar);
  note_outside(mc.outside_fraction, rep.warnings);

  const double k = cfg.cross.se_factor;
  for (std::size_t q = 0; q < levels.size(); ++q) {
    CrossRow row{"crossing", levels[q], pde[q].pde, mc.crossing[q].value, mc.crossing[q].se, 0.0, false};
    row.tolerance = std::max(cfg.cross.crossing_rel * row.mc, k * row.mc_se);
    row.pass = std::abs(row.pde - row.mc) <= row.tolerance;
    rep.rows.push_back(row);
  }
  for (std::size_t q = 0; q < radii.size(); ++q) {
    const SweepRow& p = pde[levels.size() + q];
    CrossRow row{"band", radii[q], p.pde, mc.band[q].value, mc.band[q].se, 0.0, false};
    row.tolerance = std::max(cfg.cross.band_abs, k * row.mc_se);
    row.pass = std::abs(row.pde - row.mc) <= row.tolerance && row.pde >= -0.02 && row.pde <= 1.02 && row.mc >= 0.0 &&
               row.mc <= 1.0;
    rep.rows.push_back(row);
  }
  // Shared samples: a wider band can only contain more of them.
  for (std::size_t a = 0; a < radii.size(); ++a)
    for (std::size_t b = 0; b < radii.size(); ++b)
      if (radii[a] < radii[b] && mc.band[a].value > mc.band[b].value) rep.band_monotone = false;
  if (!rep.band_monotone) rep.warnings.push_back("Monte Carlo band estimates are not monotone in a2");
  return rep;
}

void write_cross_csv(std::ostream& os, const CrossReport& r) {
  os << "kind,level,pde,mc,mc_se,tolerance,pass\n";
  char buf[256];
  for (const CrossRow& row : r.rows) {
    std::snprintf(buf, sizeof buf, "%s,%.6g,%.10e,%.10e,%.4e,%.4e,%d\n", row.kind.c_str(), row.level, row.pde, row.mc,
                  row.mc_se, row.tolerance, row.pass ? 1 : 0);
    os << buf;
  }
}

// ---------------------------------------------------------------------------

namespace {

std::ofstream open_out(const std::filesystem::path& dir, const std::string& name, RunResult& res) {
  std::ofstream os(dir / name);
  if (!os) throw Error("cannot write " + (dir / name).string());
  res.outputs.push_back(name);
  return os;
}

void write_plot_script(const std::filesystem::path& dir, const std::string& csv, const std::string& x,
                       const std::string& pde, const std::string& mc, const std::string& se, RunResult& res) {
  const std::string name = "plot_" + std::filesystem::path(csv).stem().string() + ".py";
  std::ofstream os = open_out(dir, name, res);
  os << "# Generated by bepo: plots " << csv << " (needs pandas and matplotlib).\n"
     << "import pandas as pd\nimport matplotlib.pyplot as plt\n\n"
     << "d = pd.read_csv('" << csv << "')\n"
     << "fig, ax = plt.subplots()\n"
     << "ax.plot(d['" << x << "'], d['" << pde << "'], 'o-', label='PDE')\n"
     << "if d['" << mc << "'].notna().any():\n"
     << "    ax.errorbar(d['" << x << "'], d['" << mc << "'], yerr=3 * d['" << se
     << "'], fmt='s', capsize=3, label='Monte Carlo (3 SE)')\n"
     << "ax.set_xlabel('" << x << "')\nax.legend()\nfig.savefig('"
     << std::filesystem::path(csv).stem().string() << ".png', dpi=150)\n";
}

json sweep_json(const SweepTable& t) {
  json rows = json::array();
  for (const SweepRow& r : t.rows) {
    json j{{"level", r.level},       {"pde", r.pde},         {"spread", r.spread},
           {"residual", r.residual}, {"iterations", r.iterations}, {"max_v", r.max_v},
           {"bounded", r.bounded}};
    if (r.mc) {
      j["mc"] = r.mc->value;
      j["mc_se"] = r.mc->se;
    }
    rows.push_back(j);
  }
  return rows;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

}  // namespace

RunResult run_experiment(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  const std::string started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  RunResult res;
  json summary = json::array();

  switch (cfg.experiment) {
    case Experiment::Solve: {
      const Grid grid(cfg.grid);
      const Observable g = cfg.observable.build(cfg.grid);
      const SparseSystem sys = assemble_system(grid, cfg.model, g);
      const SolveReport rep = solve_resolvent(sys, grid, cfg.solver);
      const BoundednessCheck b = check_boundedness(rep.v, sys.rhs, grid);
      for (const auto& w : g.warnings(grid)) res.warnings.push_back(g.describe() + ": " + w);
      if (!b.ok)
        res.warnings.push_back("max |v| = " + number(b.max_v) + " exceeds 1.05 sup |g| = " + number(1.05 * b.max_g) +
                               " at " + node_text(grid, b.worst));
      open_out(out_dir, "summary.json", res) << solve_summary_json(rep) << "\n";
      if (cfg.write_solution) {
        std::ofstream os = open_out(out_dir, "solution.csv", res);
        write_solution_csv(os, rep.v, grid);
      }
      summary.push_back({{"observable", g.describe()},
                         {"statistic", rep.statistic},
                         {"spread", rep.spread},
                         {"residual", rep.rel_residual},
                         {"iterations", rep.iterations},
                         {"max_v", b.max_v},
                         {"bounded", b.ok}});
      break;
    }
    case Experiment::Simulate: {
      const Observable g = cfg.observable.build(cfg.grid);
      const std::vector<double> level{cfg.observable.level};
      const std::vector<double> radius{cfg.observable.radius};
      const std::vector<Observable> obs{g};
      const MonteCarloSummary mc =
          run_monte_carlo(cfg.sim, cfg.model, level, radius, obs, cfg.grid.x_bar, cfg.grid.y_bar);
      note_outside(mc.outside_fraction, res.warnings);
      const double time = static_cast<double>(mc.samples) * cfg.sim.dt;
      {
        std::ofstream os = open_out(out_dir, "simulate.csv", res);
        char buf[200];
        os << "quantity,value,se\n";
        std::snprintf(buf, sizeof buf, "ergodic_average,%.10e,%.4e\n", mc.generic[0].value, mc.generic[0].se);
        os << buf;
        std::snprintf(buf, sizeof buf, "crossing_frequency,%.10e,%.4e\n", mc.crossing[0].value, mc.crossing[0].se);
        os << buf;
        std::snprintf(buf, sizeof buf, "band_probability,%.10e,%.4e\n", mc.band[0].value, mc.band[0].se);
        os << buf;
        std::snprintf(buf, sizeof buf, "plastic_entries_per_time,%.10e,\n", static_cast<double>(mc.entries) / time);
        os << buf;
        std::snprintf(buf, sizeof buf, "outside_fraction,%.10e,\n", mc.outside_fraction);
        os << buf;
      }
      summary.push_back({{"observable", g.describe()},
                         {"ergodic_average", mc.generic[0].value},
                         {"ergodic_average_se", mc.generic[0].se},
                         {"crossing_frequency", mc.crossing[0].value},
                         {"band_probability", mc.band[0].value},
                         {"samples", mc.samples},
                         {"plastic_entries", mc.entries},
                         {"plastic_exits", mc.exits}});
      if (cfg.dump_stride > 0) {
        std::ofstream os = open_out(out_dir, "trajectory.csv", res);
        dump_trajectory_csv(os, cfg.sim, cfg.model, cfg.dump_stride);
      }
      if (cfg.lyapunov.paths > 0) {
        SimConfig sc = cfg.sim;
        sc.n_paths = cfg.lyapunov.paths;
        const BoundReport b = lyapunov_check_mc(sc, cfg.model, lyapunov_constants(cfg.model), cfg.lyapunov.checkpoints);
        std::ofstream os = open_out(out_dir, "lyapunov.csv", res);
        os << "t,mean_V,se,bound,violated\n";
        char buf[200];
        for (const BoundRow& r : b.rows) {
          std::snprintf(buf, sizeof buf, "%.6g,%.8e,%.4e,%.8e,%d\n", r.t, r.mean, r.se, r.bound, r.violated ? 1 : 0);
          os << buf;
          summary.push_back({{"t", r.t}, {"mean_V", r.mean}, {"se", r.se}, {"bound", r.bound}, {"violated", r.violated}});
        }
        if (b.any_violation()) res.warnings.push_back("empirical E[V] exceeds the Lyapunov bound by more than 3 SE");
      }
      break;
    }
    case Experiment::CrossingSweep:
    case Experiment::ServiceabilitySweep: {
      const bool crossing = cfg.experiment == Experiment::CrossingSweep;
      const SweepTable t = crossing ? run_crossing_sweep(cfg) : run_serviceability_sweep(cfg);
      const std::string csv = crossing ? "crossing_sweep.csv" : "serviceability_sweep.csv";
      {
        std::ofstream os = open_out(out_dir, csv, res);
        write_sweep_csv(os, t);
      }
      if (cfg.plot_script) {
        if (crossing)
          write_plot_script(out_dir, csv, "a1", "nu_pde", "nu_mc", "nu_mc_se", res);
        else
          write_plot_script(out_dir, csv, "a2", "P_pde", "P_mc", "P_mc_se", res);
      }
      res.warnings.insert(res.warnings.end(), t.warnings.begin(), t.warnings.end());
      summary = sweep_json(t);
      break;
    }
    case Experiment::Convergence: {
      const Observable g = cfg.observable.build(cfg.grid);
      for (const auto& w : g.warnings(Grid(cfg.grid))) res.warnings.push_back(g.describe() + ": " + w);
      std::vector<ConvergenceRow> rows;
      for (Axis a : cfg.convergence.axes) {
        auto r = run_ladder(cfg.grid, a, cfg.convergence.refinements, cfg.model, g, cfg.solver,
                            cfg.convergence.skip_y_boundary);
        rows.insert(rows.end(), r.begin(), r.end());
      }
      std::ofstream os = open_out(out_dir, "convergence.csv", res);
      write_convergence_csv(os, rows);
      for (const ConvergenceRow& r : rows) {
        json j{{"axis", std::string(to_string(r.axis))}, {"level", r.level}, {"h", r.h}, {"diff", r.diff}};
        if (r.order) j["order"] = *r.order;
        summary.push_back(j);
      }
      break;
    }
    case Experiment::CrossValidate: {
      const CrossReport r = run_cross_validate(cfg);
      std::ofstream os = open_out(out_dir, "cross_validate.csv", res);
      write_cross_csv(os, r);
      for (const CrossRow& row : r.rows)
        summary.push_back({{"kind", row.kind},
                           {"level", row.level},
                           {"pde", row.pde},
                           {"mc", row.mc},
                           {"mc_se", row.mc_se},
                           {"tolerance", row.tolerance},
                           {"pass", row.pass}});
      res.warnings.insert(res.warnings.end(), r.warnings.begin(), r.warnings.end());
      res.ok = r.all_pass();
      break;
    }
  }

  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  res.summary_json = summary.dump();

  json manifest{{"tool", "bepo"},
                {"version", kToolVersion},
                {"experiment", std::string(to_string(cfg.experiment))},
                {"started_utc", started},
                {"wall_seconds", res.wall_seconds},
                {"threads", max_threads()},
                {"config", serialize(cfg)},
                {"outputs", res.outputs},
                {"warnings", res.warnings},
                {"summary", summary}};
  if (cfg.experiment == Experiment::CrossValidate) manifest["all_pass"] = res.ok;
  std::ofstream os(out_dir / "manifest.json");
  if (!os) throw Error("cannot write " + (out_dir / "manifest.json").string());
  os << manifest.dump(2) << "\n";
  res.outputs.push_back("manifest.json");
  return res;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(0, "", std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!j.contains("config") || !j["config"].is_string())
      throw ParseError(0, "config", "manifest has no resolved configuration");
    return parse_config(j["config"].get<std::string>());
  }
  return parse_config(text);
}

}  // namespace bepo
