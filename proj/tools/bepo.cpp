// bepo: invariant-measure statistics of the bilinear elasto-plastic oscillator
// by the resolvent PDE route and by Monte Carlo.
//
//   bepo <experiment> --config <file> [--out <dir>] [--threads N] [--seed S]
//
// <file> is a key = value configuration or a manifest.json from an earlier run.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bepo/config.hpp"
#include "bepo/errors.hpp"
#include "bepo/experiments.hpp"
#include "bepo/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Invariant-measure statistics of the bilinear elasto-plastic oscillator"};
  app.set_version_flag("--version", bepo::kToolVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
  bool print_config = false;

  for (const char* name :
       {"solve", "simulate", "crossing-sweep", "serviceability-sweep", "convergence", "cross-validate"}) {
    CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
    sub->add_option("--config,-c", config_path, "configuration document or manifest.json")->required();
    sub->add_option("--out,-o", out_dir, "output directory (overrides BEPO_OUTPUT_DIR and output_dir)");
    sub->add_option("--threads,-t", threads, "OpenMP worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed,-s", seed, "Monte Carlo seed (overrides sim.seed)");
    sub->add_flag("--print-config", print_config, "print the resolved configuration and exit");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    bepo::RunConfig cfg = bepo::load_config(config_path);
    cfg.experiment = bepo::experiment_from_string(app.get_subcommands().front()->get_name());
    if (const char* env = std::getenv("BEPO_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
    if (out_dir) cfg.output_dir = *out_dir;
    if (seed) cfg.sim.seed = *seed;
    cfg.validate();
    if (threads) bepo::set_threads(*threads);

    if (print_config) {
      std::cout << bepo::serialize(cfg);
      return 0;
    }

    const bepo::RunResult res = bepo::run_experiment(cfg, cfg.output_dir);
    for (const std::string& w : res.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << res.summary_json << "\n";
    std::fprintf(stderr, "wrote %zu files to %s in %.2f s\n", res.outputs.size(), cfg.output_dir.c_str(),
                 res.wall_seconds);
    return res.ok ? 0 : 3;
  } catch (const bepo::ParseError& e) {
    std::cerr << config_path << ": " << e.what() << "\n";
    return 2;
  } catch (const bepo::ValidationError& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
