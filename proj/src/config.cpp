#include "bepo/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "bepo/errors.hpp"

namespace bepo {

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::Solve: return "solve";
    case Experiment::Simulate: return "simulate";
    case Experiment::CrossingSweep: return "crossing-sweep";
    case Experiment::ServiceabilitySweep: return "serviceability-sweep";
    case Experiment::Convergence: return "convergence";
    case Experiment::CrossValidate: return "cross-validate";
  }
  return "?";
}

Experiment experiment_from_string(std::string_view s) {
  for (Experiment e : {Experiment::Solve, Experiment::Simulate, Experiment::CrossingSweep,
                       Experiment::ServiceabilitySweep, Experiment::Convergence, Experiment::CrossValidate})
    if (to_string(e) == s) return e;
  throw InvalidSpec("unknown experiment '" + std::string(s) + "'");
}

namespace {

std::string_view kind_name(ObservableSpec::Kind k) {
  switch (k) {
    case ObservableSpec::Kind::CrossingSpeed: return "crossing-speed";
    case ObservableSpec::Kind::PlasticBand: return "plastic-band";
    case ObservableSpec::Kind::Constant: return "constant";
  }
  return "?";
}

}  // namespace

Observable ObservableSpec::build(const GridSpec& grid) const {
  switch (kind) {
    case Kind::CrossingSpeed: return Observable::crossing_speed(level, resolved_eps0(grid));
    case Kind::PlasticBand: return Observable::plastic_band(radius);
    case Kind::Constant: return Observable::constant(value);
  }
  return Observable::constant(value);
}

void RunConfig::validate() const {
  model.validate();
  const auto wrap = [](auto&& f) {
    try {
      f();
    } catch (const InvalidSpec& e) {
      throw ValidationError(e.what());
    }
  };
  wrap([&] { grid.validate(); });
  wrap([&] { solver.validate(); });
  wrap([&] { sim.validate(); });
  if (grid.b != model.b) throw ValidationError("grid.b must equal model.b");
  if (std::abs(sim.init.z) > model.b) throw ValidationError("sim.z0 must satisfy |z0| <= model.b");
  if ((experiment == Experiment::CrossingSweep || experiment == Experiment::ServiceabilitySweep) && sweep.empty())
    throw ValidationError("sweep must be nonempty for " + std::string(to_string(experiment)));
  if (experiment == Experiment::CrossValidate && cross.levels.empty() && cross.radii.empty())
    throw ValidationError("cross.levels and cross.radii are both empty");
  if (experiment == Experiment::Convergence && convergence.axes.empty())
    throw ValidationError("convergence.axes must be nonempty");
  if (convergence.refinements < 1) throw ValidationError("convergence.refinements must be >= 1");
  if (!(observable.radius >= 0)) throw ValidationError("observable.radius must be >= 0");
  if (!(observable.eps0 >= 0)) throw ValidationError("observable.eps0 must be >= 0 (0 selects the default)");
  if (experiment == Experiment::ServiceabilitySweep)
    for (double a : sweep)
      if (!(a >= 0)) throw ValidationError("serviceability sweep values must be >= 0");
  for (double a : cross.radii)
    if (!(a >= 0)) throw ValidationError("cross.radii values must be >= 0");
  if (!(cross.crossing_rel >= 0) || !(cross.band_abs >= 0) || !(cross.se_factor >= 0))
    throw ValidationError("cross tolerances must be >= 0");
  for (double t : lyapunov.checkpoints)
    if (!(t > 0)) throw ValidationError("lyapunov.checkpoints must be > 0");
  if (output_dir.empty()) throw ValidationError("output_dir must be nonempty");
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct BadValue {
  std::string what;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

double to_double(const std::string& s) {
  std::string t = trim(s);
  if (!t.empty() && t.front() == '+') t.erase(0, 1);
  double v = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty()) throw BadValue{"expected a number, got '" + t + "'"};
  return v;
}

std::uint64_t to_unsigned(const std::string& s) {
  const std::string t = trim(s);
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec == std::errc() && p == t.data() + t.size() && !t.empty()) return v;
  // Accept integral values written in floating notation, e.g. 1e6.
  const double d = to_double(t);
  if (d < 0 || d != std::floor(d) || d > 1.8e19) throw BadValue{"expected a nonnegative integer, got '" + t + "'"};
  return static_cast<std::uint64_t>(d);
}

int to_int(const std::string& s) {
  const double d = to_double(s);
  if (d != std::floor(d) || std::abs(d) > 2e9) throw BadValue{"expected an integer, got '" + trim(s) + "'"};
  return static_cast<int>(d);
}

bool to_bool(const std::string& s) {
  const std::string t = trim(s);
  if (t == "true" || t == "on" || t == "yes" || t == "1") return true;
  if (t == "false" || t == "off" || t == "no" || t == "0") return false;
  throw BadValue{"expected true or false, got '" + t + "'"};
}

// "[a, b, c]" or "a, b, c"; "[]" is the empty list.
std::vector<std::string> to_list(const std::string& s) {
  std::string t = trim(s);
  if (!t.empty() && t.front() == '[') {
    if (t.back() != ']') throw BadValue{"unterminated list"};
    t = trim(std::string_view(t).substr(1, t.size() - 2));
  }
  std::vector<std::string> out;
  if (t.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = t.find(',', start);
    const std::string item = unquote(trim(std::string_view(t).substr(start, comma - start)));
    if (item.empty()) throw BadValue{"empty list item"};
    out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<double> to_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : to_list(s)) out.push_back(to_double(item));
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(std::uint64_t v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

std::string fmt(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s + "]";
}

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

// Ordered so serialize() groups keys by section.
const std::vector<std::pair<std::string, Field>>& fields() {
  using R = RunConfig;
  using S = const std::string&;
  static const std::vector<std::pair<std::string, Field>> table = {
      {"experiment",
       {[](R& c, S v) {
          try {
            c.experiment = experiment_from_string(unquote(trim(v)));
          } catch (const InvalidSpec& e) {
            throw BadValue{e.what()};
          }
        },
        [](const R& c) { return std::string(to_string(c.experiment)); }}},
      {"sweep", {[](R& c, S v) { c.sweep = to_doubles(v); }, [](const R& c) { return fmt(c.sweep); }}},
      {"output_dir",
       {[](R& c, S v) { c.output_dir = unquote(trim(v)); }, [](const R& c) { return "\"" + c.output_dir + "\""; }}},
      {"model.k", {[](R& c, S v) { c.model.k = to_double(v); }, [](const R& c) { return fmt(c.model.k); }}},
      {"model.alpha", {[](R& c, S v) { c.model.alpha = to_double(v); }, [](const R& c) { return fmt(c.model.alpha); }}},
      {"model.b",
       {[](R& c, S v) { c.model.b = c.grid.b = to_double(v); }, [](const R& c) { return fmt(c.model.b); }}},
      {"model.sigma", {[](R& c, S v) { c.model.sigma = to_double(v); }, [](const R& c) { return fmt(c.model.sigma); }}},
      {"model.damping",
       {[](R& c, S v) { c.model.force.damping = to_double(v); },
        [](const R& c) { return fmt(c.model.force.damping); }}},
      {"model.stiffness_x",
       {[](R& c, S v) { c.model.force.stiffness_x = to_double(v); },
        [](const R& c) { return fmt(c.model.force.stiffness_x); }}},
      {"model.offset",
       {[](R& c, S v) { c.model.force.offset = to_double(v); }, [](const R& c) { return fmt(c.model.force.offset); }}},
      {"grid.x_bar", {[](R& c, S v) { c.grid.x_bar = to_double(v); }, [](const R& c) { return fmt(c.grid.x_bar); }}},
      {"grid.y_bar", {[](R& c, S v) { c.grid.y_bar = to_double(v); }, [](const R& c) { return fmt(c.grid.y_bar); }}},
      {"grid.lambda", {[](R& c, S v) { c.grid.lambda = to_double(v); }, [](const R& c) { return fmt(c.grid.lambda); }}},
      {"grid.I", {[](R& c, S v) { c.grid.I = to_int(v); }, [](const R& c) { return std::to_string(c.grid.I); }}},
      {"grid.J", {[](R& c, S v) { c.grid.J = to_int(v); }, [](const R& c) { return std::to_string(c.grid.J); }}},
      {"grid.K", {[](R& c, S v) { c.grid.K = to_int(v); }, [](const R& c) { return std::to_string(c.grid.K); }}},
      {"solver.rel_tol",
       {[](R& c, S v) { c.solver.rel_tol = to_double(v); }, [](const R& c) { return fmt(c.solver.rel_tol); }}},
      {"solver.max_iters",
       {[](R& c, S v) { c.solver.max_iters = to_unsigned(v); },
        [](const R& c) { return fmt(static_cast<std::uint64_t>(c.solver.max_iters)); }}},
      {"solver.restart",
       {[](R& c, S v) { c.solver.restart = to_unsigned(v); },
        [](const R& c) { return fmt(static_cast<std::uint64_t>(c.solver.restart)); }}},
      {"solver.drop_tol",
       {[](R& c, S v) { c.solver.drop_tol = to_double(v); }, [](const R& c) { return fmt(c.solver.drop_tol); }}},
      {"solver.fill",
       {[](R& c, S v) { c.solver.fill = to_unsigned(v); },
        [](const R& c) { return fmt(static_cast<std::uint64_t>(c.solver.fill)); }}},
      {"solver.shift", {[](R& c, S v) { c.solver.shift = to_double(v); }, [](const R& c) { return fmt(c.solver.shift); }}},
      {"solver.ordering",
       {[](R& c, S v) {
          try {
            c.solver.ordering = ordering_from_string(unquote(trim(v)));
          } catch (const InvalidSpec& e) {
            throw BadValue{e.what()};
          }
        },
        [](const R& c) { return to_string(c.solver.ordering); }}},
      {"solver.deflate_constant",
       {[](R& c, S v) { c.solver.deflate_constant = to_bool(v); },
        [](const R& c) { return fmt(c.solver.deflate_constant); }}},
      {"sim.dt", {[](R& c, S v) { c.sim.dt = to_double(v); }, [](const R& c) { return fmt(c.sim.dt); }}},
      {"sim.n_steps",
       {[](R& c, S v) { c.sim.n_steps = to_unsigned(v); },
        [](const R& c) { return fmt(static_cast<std::uint64_t>(c.sim.n_steps)); }}},
      {"sim.burn_in",
       {[](R& c, S v) { c.sim.burn_in = to_unsigned(v); },
        [](const R& c) { return fmt(static_cast<std::uint64_t>(c.sim.burn_in)); }}},
      {"sim.seed", {[](R& c, S v) { c.sim.seed = to_unsigned(v); }, [](const R& c) { return fmt(c.sim.seed); }}},
      {"sim.n_paths",
       {[](R& c, S v) { c.sim.n_paths = to_unsigned(v); },
        [](const R& c) { return fmt(static_cast<std::uint64_t>(c.sim.n_paths)); }}},
      {"sim.batches",
       {[](R& c, S v) { c.sim.batches = to_unsigned(v); },
        [](const R& c) { return fmt(static_cast<std::uint64_t>(c.sim.batches)); }}},
      {"sim.x0", {[](R& c, S v) { c.sim.init.x = to_double(v); }, [](const R& c) { return fmt(c.sim.init.x); }}},
      {"sim.y0", {[](R& c, S v) { c.sim.init.y = to_double(v); }, [](const R& c) { return fmt(c.sim.init.y); }}},
      {"sim.z0", {[](R& c, S v) { c.sim.init.z = to_double(v); }, [](const R& c) { return fmt(c.sim.init.z); }}},
      {"sim.monte_carlo",
       {[](R& c, S v) { c.monte_carlo = to_bool(v); }, [](const R& c) { return fmt(c.monte_carlo); }}},
      {"sim.dump_stride",
       {[](R& c, S v) { c.dump_stride = to_unsigned(v); },
        [](const R& c) { return fmt(static_cast<std::uint64_t>(c.dump_stride)); }}},
      {"observable.kind",
       {[](R& c, S v) {
          const std::string k = unquote(trim(v));
          for (auto kind : {ObservableSpec::Kind::CrossingSpeed, ObservableSpec::Kind::PlasticBand,
                            ObservableSpec::Kind::Constant})
            if (kind_name(kind) == k) {
              c.observable.kind = kind;
              return;
            }
          throw BadValue{"expected crossing-speed, plastic-band or constant, got '" + k + "'"};
        },
        [](const R& c) { return std::string(kind_name(c.observable.kind)); }}},
      {"observable.level",
       {[](R& c, S v) { c.observable.level = to_double(v); }, [](const R& c) { return fmt(c.observable.level); }}},
      {"observable.radius",
       {[](R& c, S v) { c.observable.radius = to_double(v); }, [](const R& c) { return fmt(c.observable.radius); }}},
      {"observable.value",
       {[](R& c, S v) { c.observable.value = to_double(v); }, [](const R& c) { return fmt(c.observable.value); }}},
      {"observable.eps0",
       {[](R& c, S v) { c.observable.eps0 = to_double(v); }, [](const R& c) { return fmt(c.observable.eps0); }}},
      {"convergence.axes",
       {[](R& c, S v) {
          c.convergence.axes.clear();
          for (const auto& a : to_list(v)) {
            try {
              c.convergence.axes.push_back(axis_from_string(a));
            } catch (const InvalidSpec& e) {
              throw BadValue{e.what()};
            }
          }
        },
        [](const R& c) {
          std::string s = "[";
          for (std::size_t i = 0; i < c.convergence.axes.size(); ++i)
            s += (i ? ", " : "") + std::string(to_string(c.convergence.axes[i]));
          return s + "]";
        }}},
      {"convergence.refinements",
       {[](R& c, S v) { c.convergence.refinements = to_int(v); },
        [](const R& c) { return std::to_string(c.convergence.refinements); }}},
      {"convergence.skip_y_boundary",
       {[](R& c, S v) { c.convergence.skip_y_boundary = to_bool(v); },
        [](const R& c) { return fmt(c.convergence.skip_y_boundary); }}},
      {"cross.levels", {[](R& c, S v) { c.cross.levels = to_doubles(v); }, [](const R& c) { return fmt(c.cross.levels); }}},
      {"cross.radii", {[](R& c, S v) { c.cross.radii = to_doubles(v); }, [](const R& c) { return fmt(c.cross.radii); }}},
      {"cross.crossing_rel",
       {[](R& c, S v) { c.cross.crossing_rel = to_double(v); }, [](const R& c) { return fmt(c.cross.crossing_rel); }}},
      {"cross.band_abs",
       {[](R& c, S v) { c.cross.band_abs = to_double(v); }, [](const R& c) { return fmt(c.cross.band_abs); }}},
      {"cross.se_factor",
       {[](R& c, S v) { c.cross.se_factor = to_double(v); }, [](const R& c) { return fmt(c.cross.se_factor); }}},
      {"lyapunov.paths",
       {[](R& c, S v) { c.lyapunov.paths = to_unsigned(v); },
        [](const R& c) { return fmt(static_cast<std::uint64_t>(c.lyapunov.paths)); }}},
      {"lyapunov.checkpoints",
       {[](R& c, S v) { c.lyapunov.checkpoints = to_doubles(v); },
        [](const R& c) { return fmt(c.lyapunov.checkpoints); }}},
      {"output.solution_csv",
       {[](R& c, S v) { c.write_solution = to_bool(v); }, [](const R& c) { return fmt(c.write_solution); }}},
      {"output.plot_script",
       {[](R& c, S v) { c.plot_script = to_bool(v); }, [](const R& c) { return fmt(c.plot_script); }}},
  };
  return table;
}

const Field* find_field(const std::string& key) {
  for (const auto& [k, f] : fields())
    if (k == key) return &f;
  return nullptr;
}

// Strips a trailing comment that is not inside quotes.
std::string strip_comment(const std::string& line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quote) {
      if (ch == quote) quote = 0;
    } else if (ch == '"' || ch == '\'') {
      quote = ch;
    } else if (ch == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  RunConfig c;
  c.grid.lambda = 1e-3;
  std::string section;
  std::map<std::string, std::size_t> seen;
  bool burn_in_given = false;

  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (line_no == 1 && raw.size() >= 3 && raw.compare(0, 3, "\xEF\xBB\xBF") == 0) raw.erase(0, 3);  // UTF-8 BOM
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[' && line.find('=') == std::string::npos) {
      if (line.back() != ']') throw ParseError(line_no, "", "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty()) continue;  // "[]" returns to the top level
      bool known = false;
      for (const auto& [k, f] : fields())
        if (k.rfind(section + ".", 0) == 0) known = true;
      if (!known) throw ParseError(line_no, section, "unknown section");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "", "expected 'key = value'");
    std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "", "missing key");
    if (!section.empty()) key = section + "." + key;
    const Field* f = find_field(key);
    if (!f) throw ParseError(line_no, key, "unknown key");
    if (auto it = seen.find(key); it != seen.end())
      throw ParseError(line_no, key, "duplicate key (first set on line " + std::to_string(it->second) + ")");
    seen.emplace(key, line_no);
    if (value.empty()) throw ParseError(line_no, key, "missing value");
    try {
      f->set(c, value);
    } catch (const BadValue& e) {
      throw ParseError(line_no, key, e.what);
    }
    if (key == "sim.burn_in") burn_in_given = true;
  }
  if (!burn_in_given) c.sim.burn_in = c.sim.n_steps / 100;
  c.validate();
  return c;
}

std::string serialize(const RunConfig& c) {
  std::string out;
  for (const auto& [k, f] : fields()) out += k + " = " + f.get(c) + "\n";
  return out;
}

}  // namespace bepo
