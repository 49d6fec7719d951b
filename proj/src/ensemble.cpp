#include "spinwalk/ensemble.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace spinwalk {

ProbabilityDistribution distribution_of(const SectorState& s) {
  ProbabilityDistribution d;
  d.p = position_distribution(s);
  d.site_offset = s.site_offset;
  return d;
}

void validate(const EnsembleConfig& c, int n_sites) {
  if (c.n_samples < 1) throw ValidationError("n_samples must be at least 1");
  if (c.exhaustive && n_sites > 20)
    throw ValidationError("exhaustive enumeration limited to 20 sites");
  if (c.workers < 1) throw ValidationError("workers must be at least 1");
}

void validate(const ObservableSeries& s) {
  if (s.times.size() != s.values.size())
    throw ValidationError("series " + s.label + ": times and values differ in length");
  for (std::size_t i = 1; i < s.times.size(); ++i)
    if (s.times[i] <= s.times[i - 1])
      throw ValidationError("series " + s.label + ": times must be strictly increasing");
}

// ===== Sector sampling =====

namespace {

SpinSector drawn_sector(std::uint64_t seed, std::uint64_t k, int n_sites) {
  SpinSector sec;
  sec.signs.resize(n_sites);
  for (int j = 0; j < n_sites; ++j)
    sec.signs[j] = stream_value(seed, k, static_cast<std::uint64_t>(j)) & 1u ? -1 : +1;
  return sec;
}

}  // namespace

std::vector<SpinSector> sample_sectors(int n_sites, const EnsembleConfig& config) {
  validate(config, n_sites);
  std::vector<SpinSector> out;
  if (config.exhaustive) {
    const std::uint64_t total = std::uint64_t{1} << n_sites;
    out.reserve(total);
    for (std::uint64_t id = 0; id < total; ++id)
      out.push_back(sector_from_id(id, n_sites));
  } else {
    out.reserve(config.n_samples);
    for (std::uint64_t k = 0; k < config.n_samples; ++k)
      out.push_back(drawn_sector(config.seed, k, n_sites));
  }
  return out;
}

// ===== Ensemble mean =====

namespace {

constexpr std::uint64_t kReduceBlock = 256;

}  // namespace

EnsembleResult run_ensemble(const WalkParams& params, const std::vector<int>& snapshot_times,
                            const EnsembleConfig& config) {
  spinwalk::validate(params);
  validate(config, params.n_sites);
  if (snapshot_times.empty()) throw ValidationError("no snapshot times requested");

  const int n = params.n_sites;
  const int n_times = static_cast<int>(snapshot_times.size());
  const std::uint64_t total =
      config.exhaustive ? (std::uint64_t{1} << n) : config.n_samples;
  const std::uint64_t n_leaves = (total + kReduceBlock - 1) / kReduceBlock;

  // Each leaf is the in-order partial sum of one block of consecutive samples.
  // Workers race only over which leaf they compute, never over its contents,
  // and the final fold walks leaves in index order.
  std::vector<Eigen::MatrixXd> leaves(n_leaves);
  std::atomic<std::uint64_t> next_leaf{0};
  std::exception_ptr failure;
  std::mutex failure_mx;

  auto work = [&]() {
    try {
      for (;;) {
        const std::uint64_t leaf = next_leaf.fetch_add(1);
        if (leaf >= n_leaves) return;
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n_times, n);
        const std::uint64_t lo = leaf * kReduceBlock;
        const std::uint64_t hi = std::min(total, lo + kReduceBlock);
        for (std::uint64_t k = lo; k < hi; ++k) {
          const SpinSector sec = config.exhaustive ? sector_from_id(k, n)
                                                   : drawn_sector(config.seed, k, n);
          SectorState st = initial_sector_state(params);
          int row = 0;
          evolve_sector_observe(st, sec, params, snapshot_times.back(), snapshot_times,
                                [&](int, const SectorState& s) {
                                  acc.row(row++) += position_distribution(s).transpose();
                                });
        }
        leaves[leaf] = std::move(acc);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mx);
      if (!failure) failure = std::current_exception();
    }
  };

  if (config.workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < config.workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  PairwiseAccumulator<Eigen::MatrixXd> fold;
  for (std::uint64_t leaf = 0; leaf < n_leaves; ++leaf) fold.push(std::move(leaves[leaf]));
  Eigen::MatrixXd mean = fold.take() / static_cast<double>(total);

  EnsembleResult res;
  res.times = snapshot_times;
  res.samples_used = total;
  const int offset = params.boundary == Boundary::open ? -(n - 1) / 2 : 0;
  for (int r = 0; r < n_times; ++r) {
    ProbabilityDistribution d;
    d.p = mean.row(r).transpose();
    d.site_offset = offset;
    res.mean_p.push_back(std::move(d));
  }
  return res;
}

ProbabilityDistribution ensemble_distribution(const WalkParams& params, int t,
                                              const EnsembleConfig& config) {
  return run_ensemble(params, {t}, config).mean_p.front();
}

// ===== Diagnostics =====

double variance(const ProbabilityDistribution& dist) {
  double v = 0.0;
  for (int i = 0; i < dist.p.size(); ++i) {
    const double site = dist.site_of(i);
    v += site * site * dist.p(i);
  }
  return v;
}

double normalized_ipr(const ProbabilityDistribution& dist, int n_norm) {
  if (n_norm <= 0) throw ValidationError("n_norm must be positive");
  return 1.0 / (static_cast<double>(n_norm) * dist.p.squaredNorm());
}

LocalizationFit fit_localization_length(const ProbabilityDistribution& dist,
                                        const FitWindow& window) {
  if (window.abs_min < 0 || window.abs_max < window.abs_min)
    throw ValidationError("bad fit window");
  std::vector<double> xs, ys;  // x = |n|, y = ln P_n
  for (int i = 0; i < dist.p.size(); ++i) {
    const int a = std::abs(dist.site_of(i));
    if (a < window.abs_min || a > window.abs_max) continue;
    if (dist.p(i) <= 0.0)
      throw NonPositiveProbability("P at site " + std::to_string(dist.site_of(i)) +
                                   " is not positive inside the fit window");
    xs.push_back(a);
    ys.push_back(std::log(dist.p(i)));
  }
  const int m = static_cast<int>(xs.size());
  if (m < 3) throw DegenerateWindow("fit window holds fewer than 3 sites");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < m; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = m * sxx - sx * sx;
  if (std::abs(denom) < 1e-12) throw DegenerateWindow("fit window has no spread in |n|");
  const double slope = (m * sxy - sx * sy) / denom;
  const double icpt = (sy - slope * sx) / m;

  LocalizationFit fit;
  fit.lambda = -2.0 / slope;
  double ss = 0;
  for (int i = 0; i < m; ++i) {
    const double r = ys[i] - (icpt + slope * xs[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / m);
  return fit;
}

}  // namespace spinwalk
