#pragma once
// Experiment drivers: a resolved configuration in, CSV files plus one
// manifest out.

#include <string>
#include <vector>

#include "spinwalk/config.hpp"

namespace spinwalk {

// Files written by one run.  The manifest enumerates every CSV, so each
// output traces back to exactly one manifest.
struct RunResult {
  std::vector<std::string> csv_paths;
  std::string manifest_path;
  double wall_time_s = 0.0;
};

// Runs the configured experiment and writes its outputs under
// cfg.output_dir.  Identical (config, seed) pairs produce byte-identical
// CSVs regardless of worker count; partially written files are removed if
// the run throws.
RunResult run_experiment(const ExperimentConfig& cfg);

}  // namespace spinwalk
