#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "uq/config.hpp"

namespace uq {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitNumeric = 2, kExitNotConverged = 3 };

/// 1%, 3%, ..., 99%.
const std::vector<double>& quantile_levels();

/// Linear-interpolation (type 7) empirical quantiles; NaN when there are no samples.
std::vector<double> empirical_quantiles(std::vector<double> samples, const std::vector<double>& probs);

struct ExperimentOutcome {
  int exit_code = kExitOk;
  bool converged = true;
  std::vector<std::string> files;
};

/// Runs every requested estimator for each epsilon (and frequency) and writes levels.csv,
/// rates.json, cost.csv, field_stats.csv, curve.csv (elastoplastic), frf.csv (dynamic) and
/// manifest.json into cfg.output_dir. The manifest is written before any computation.
ExperimentOutcome run_experiment(const RunConfig& cfg, std::ostream& log);

/// Writes samples.csv with `count` independent realizations at cfg.sample_level, one per column.
std::string emit_sample_trace(const RunConfig& cfg, int count, std::ostream& log);

/// Mesh hierarchy table and the bending-wavelength resolution check.
void print_mesh_info(const RunConfig& cfg, std::ostream& out);

}  // namespace uq
