#pragma once

// Experiment drivers behind the command-line tool. Each returns its table plus
// the warnings raised on the way; run_experiment() also writes the files and
// the run manifest.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bepo/config.hpp"
#include "bepo/sde_sim.hpp"

namespace bepo {

inline constexpr const char* kToolVersion = "0.1.0";

struct SweepRow {
  double level = 0.0;  // a1 or a2
  double pde = 0.0;    // statistic of the resolvent solve
  std::optional<Estimate> mc;
  double spread = 0.0;
  double residual = 0.0;  // relative residual
  std::size_t iterations = 0;
  double max_v = 0.0;
  bool bounded = true;  // ||v|| <= 1.05 sup |g|
};

struct SweepTable {
  Experiment kind = Experiment::CrossingSweep;
  std::vector<SweepRow> rows;  // in sweep order
  std::vector<std::string> warnings;
  double outside_fraction = 0.0;  // MC samples outside the truncated box
};

/// Shared matrix factorization for all levels, one Monte Carlo sample set for
/// all levels (so the band column is nondecreasing in a2 when a2 is).
SweepTable run_crossing_sweep(const RunConfig& cfg);
SweepTable run_serviceability_sweep(const RunConfig& cfg);

/// `a1,nu_pde,nu_mc,nu_mc_se,spread,residual` or `a2,P_pde,P_mc,P_mc_se,spread,residual`.
void write_sweep_csv(std::ostream& os, const SweepTable& t);

struct CrossRow {
  std::string kind;  // "crossing" or "band"
  double level = 0.0;
  double pde = 0.0;
  double mc = 0.0;
  double mc_se = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct CrossReport {
  std::vector<CrossRow> rows;
  bool band_monotone = true;  // MC band estimates nondecreasing in a2
  std::vector<std::string> warnings;
  bool all_pass() const;
};

/// PDE and Monte Carlo estimates at cfg.cross.levels (crossing frequency) and
/// cfg.cross.radii (band probability), judged with the cfg.cross rules. Band
/// rows also require P_pde in [-0.02, 1.02] and P_mc in [0, 1].
CrossReport run_cross_validate(const RunConfig& cfg);

/// `kind,level,pde,mc,mc_se,tolerance,pass`
void write_cross_csv(std::ostream& os, const CrossReport& r);

/// What run_experiment produced.
struct RunResult {
  std::vector<std::string> outputs;   // files written, relative to the output directory
  std::vector<std::string> warnings;
  std::string summary_json;           // per-experiment summary rows (JSON array)
  double wall_seconds = 0.0;
  bool ok = true;                     // cross-validate: all rows passed
};

/// Runs cfg.experiment, writes its outputs and manifest.json into `out_dir`.
RunResult run_experiment(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Reads a configuration document, or the resolved configuration stored in a
/// manifest.json written by run_experiment.
RunConfig load_config(const std::filesystem::path& path);

}  // namespace bepo
