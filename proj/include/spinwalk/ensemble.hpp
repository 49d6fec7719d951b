#pragma once

#include <string>
#include <vector>

#include "spinwalk/walk_core.hpp"

namespace spinwalk {

// Site probabilities P_n; lattice coordinate of entry i is i + site_offset.
struct ProbabilityDistribution {
  Eigen::VectorXd p;
  int site_offset = 0;

  int site_of(int i) const { return i + site_offset; }
  int col_of(int n) const { return n - site_offset; }
};

ProbabilityDistribution distribution_of(const SectorState& s);

struct EnsembleConfig {
  std::uint64_t n_samples = 4000;
  std::uint64_t seed = 0;
  bool exhaustive = false;  // enumerate all 2^N sectors, N <= 20 only
  int workers = 1;
};

void validate(const EnsembleConfig& c, int n_sites);

// Scalar observable against time, e.g. a variance series.
struct ObservableSeries {
  std::vector<int> times;
  std::vector<double> values;
  std::string label;
};

void validate(const ObservableSeries& s);

// Sector k is a pure function of (seed, k): site j of sample k flips on an
// independent fair bit from the counter RNG stream.
std::vector<SpinSector> sample_sectors(int n_sites, const EnsembleConfig& config);

struct EnsembleResult {
  std::vector<int> times;
  std::vector<ProbabilityDistribution> mean_p;  // one distribution per time
  std::uint64_t samples_used = 0;
};

// Mean walker distribution over sectors at each snapshot time.  The reduction
// is a fixed-shape pairwise tree over 256-sample blocks, so the result is
// bitwise identical for any worker count.
EnsembleResult run_ensemble(const WalkParams& params, const std::vector<int>& snapshot_times,
                            const EnsembleConfig& config);

ProbabilityDistribution ensemble_distribution(const WalkParams& params, int t,
                                              const EnsembleConfig& config);

// Second moment about n = 0.
double variance(const ProbabilityDistribution& dist);

// (n_norm * sum P_n^2)^(-1); in (0, 1] for support on n_norm sites.
double normalized_ipr(const ProbabilityDistribution& dist, int n_norm);

// Tail fit ln P_n = c - 2|n|/lambda over abs_min <= |n| <= abs_max.
struct FitWindow {
  int abs_min = 2;
  int abs_max = 20;
};

struct LocalizationFit {
  double lambda = 0.0;
  double residual = 0.0;  // RMS of the log-space fit residuals
};

LocalizationFit fit_localization_length(const ProbabilityDistribution& dist,
                                        const FitWindow& window = {});

}  // namespace spinwalk
