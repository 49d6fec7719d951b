#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spinwalk/ensemble.hpp"
#include "spinwalk/mps.hpp"
#include "spinwalk/walk_core.hpp"

namespace spinwalk {

inline constexpr const char* kVersion = "1.0.0";

enum class Engine { sector, mps, exact };

enum class Experiment {
  distribution,
  variance_series,
  ipr_scan,
  spectrum,
  entropy_series,
  spin_textures,
  field_perturbation,
  entropy_profile,
  volume_law,
};

const char* to_string(Engine e);
const char* to_string(Experiment x);

// Throw ValidationError on unknown names.
Engine engine_from_string(const std::string& s);
Experiment experiment_from_string(const std::string& s);

// Fully resolved run description: every tunable that affects output numbers
// lives here and is echoed into the run manifest.
struct ExperimentConfig {
  Engine engine = Engine::sector;
  Experiment experiment = Experiment::distribution;
  WalkParams walk;
  EnsembleConfig ensemble;
  std::vector<double> phi_grid;    // resolved: never empty
  std::vector<double> phi_prime;   // field strengths; resolved: never empty
  std::vector<int> snapshot_times; // resolved: never empty, ascending
  FitWindow fit_window;
  MpsOptions mps;
  std::string output_dir;
};

// Command-line values that take precedence over the config document.
struct ConfigOverrides {
  std::optional<Engine> engine;
  std::optional<Experiment> experiment;
  std::optional<double> phi;
  std::optional<int> steps;
  std::optional<std::uint64_t> samples;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
};

// Parses a flat key = value document ('#' starts a comment).  Unknown or
// duplicate keys raise ParseError with the line number; invariant violations
// raise ValidationError.  The result has every default filled in: theta
// defaults to pi/4, samples to 4000, the truncation tolerance to 1e-8, and an
// unset lattice size becomes 2*steps+1 on open boundaries.
ExperimentConfig parse_config(const std::string& text, const ConfigOverrides& over = {});

ExperimentConfig parse_config_file(const std::string& path, const ConfigOverrides& over = {});

}  // namespace spinwalk
