#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <set>

#include "spinwalk/ensemble.hpp"

using namespace spinwalk;

namespace {

WalkParams open_params(int n_sites, int steps, double phi) {
  WalkParams p;
  p.n_sites = n_sites;
  p.steps = steps;
  p.phi = phi;
  return p;
}

}  // namespace

// ===== Sampling =====

TEST_CASE("sampling is a pure function of the seed") {
  EnsembleConfig c;
  c.n_samples = 64;
  c.seed = 1234567;
  auto a = sample_sectors(17, c);
  auto b = sample_sectors(17, c);
  REQUIRE(a.size() == 64);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k].signs == b[k].signs);

  c.seed = 7654321;
  auto d = sample_sectors(17, c);
  int differing = 0;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a[k].signs != d[k].signs) ++differing;
  CHECK(differing > 32);
}

TEST_CASE("site means stay near zero at large sample counts") {
  EnsembleConfig c;
  c.n_samples = 100000;
  c.seed = 42;
  auto secs = sample_sectors(20, c);
  int ok = 0;
  for (int j = 0; j < 20; ++j) {
    double mean = 0;
    for (const auto& s : secs) mean += s.signs[j];
    mean /= static_cast<double>(secs.size());
    if (std::abs(mean) < 0.0095) ++ok;
  }
  CHECK(ok >= 19);
}

TEST_CASE("exhaustive mode enumerates every sector once") {
  EnsembleConfig c;
  c.exhaustive = true;
  auto secs = sample_sectors(3, c);
  REQUIRE(secs.size() == 8);
  std::set<std::vector<int>> seen;
  for (const auto& s : secs) seen.insert(s.signs);
  CHECK(seen.size() == 8);

  EnsembleConfig big = c;
  CHECK_THROWS_AS(sample_sectors(21, big), ValidationError);
}

// ===== Ensemble mean =====

TEST_CASE("zero coupling reproduces the clean walk for any sample count") {
  WalkParams p = open_params(41, 20, 0.0);
  EnsembleConfig c;
  c.n_samples = 3;
  c.seed = 9;
  ProbabilityDistribution mean = ensemble_distribution(p, 20, c);

  SectorState s = initial_sector_state(p);
  SpinSector uniform;
  uniform.signs.assign(41, +1);
  auto ref = evolve_sector(s, uniform, p, 20, {20});
  Eigen::VectorXd pr = position_distribution(ref[0]);
  CHECK((mean.p - pr).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("sampled mean converges to the exhaustive mean") {
  WalkParams p;
  p.n_sites = 8;
  p.steps = 10;
  p.phi = 3.0 * kPi / 8.0;
  p.boundary = Boundary::periodic;

  EnsembleConfig ex;
  ex.exhaustive = true;
  ProbabilityDistribution exact = ensemble_distribution(p, 10, ex);
  CHECK(std::abs(exact.p.sum() - 1.0) < 1e-10);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    EnsembleConfig mc;
    mc.n_samples = 10000;
    mc.seed = seed;
    ProbabilityDistribution est = ensemble_distribution(p, 10, mc);
    CHECK((est.p - exact.p).cwiseAbs().maxCoeff() < 0.02);
  }
}

TEST_CASE("worker count does not change a single bit of the mean") {
  WalkParams p = open_params(61, 30, 1.1);
  EnsembleConfig c;
  c.n_samples = 700;  // not a multiple of the reduction block
  c.seed = 77;

  c.workers = 1;
  EnsembleResult r1 = run_ensemble(p, {10, 30}, c);
  c.workers = 2;
  EnsembleResult r2 = run_ensemble(p, {10, 30}, c);
  c.workers = 5;
  EnsembleResult r5 = run_ensemble(p, {10, 30}, c);

  for (std::size_t t = 0; t < r1.mean_p.size(); ++t) {
    CHECK(std::memcmp(r1.mean_p[t].p.data(), r2.mean_p[t].p.data(),
                      sizeof(double) * r1.mean_p[t].p.size()) == 0);
    CHECK(std::memcmp(r1.mean_p[t].p.data(), r5.mean_p[t].p.data(),
                      sizeof(double) * r1.mean_p[t].p.size()) == 0);
  }
}

TEST_CASE("variance of the clean ensemble grows ballistically") {
  WalkParams p = open_params(201, 100, 0.0);
  EnsembleConfig c;
  c.n_samples = 1;
  std::vector<int> times;
  for (int t = 10; t <= 100; t += 5) times.push_back(t);
  EnsembleResult r = run_ensemble(p, times, c);

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int m = static_cast<int>(times.size());
  for (int k = 0; k < m; ++k) {
    const double x = std::log(static_cast<double>(times[k]));
    const double y = std::log(variance(r.mean_p[k]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  CHECK(slope == doctest::Approx(2.0).epsilon(0.025));
}

// ===== Scalar diagnostics =====

TEST_CASE("variance of point and two-point distributions") {
  ProbabilityDistribution d;
  d.p = Eigen::Vector3d(0.0, 1.0, 0.0);
  d.site_offset = -1;
  CHECK(variance(d) == 0.0);

  d.p = Eigen::Vector3d(0.5, 0.0, 0.5);
  CHECK(variance(d) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("normalized participation ratio on reference shapes") {
  ProbabilityDistribution u;
  u.p = Eigen::VectorXd::Constant(10, 0.1);
  CHECK(normalized_ipr(u, 10) == doctest::Approx(1.0).epsilon(1e-12));

  ProbabilityDistribution delta;
  delta.p = Eigen::VectorXd::Zero(10);
  delta.p(4) = 1.0;
  CHECK(normalized_ipr(delta, 10) == doctest::Approx(0.1).epsilon(1e-12));

  ProbabilityDistribution half;
  half.p = Eigen::VectorXd::Zero(4);
  half.p(0) = 0.5;
  half.p(2) = 0.5;
  CHECK(normalized_ipr(half, 4) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("participation ratio stays inside its bounds") {
  std::uint64_t x = 99;
  for (int trial = 0; trial < 50; ++trial) {
    ProbabilityDistribution d;
    d.p.resize(37);
    for (int i = 0; i < 37; ++i) {
      x = splitmix64(x);
      d.p(i) = static_cast<double>(x >> 11) * 0x1.0p-53;
    }
    d.p /= d.p.sum();
    const double ipr = normalized_ipr(d, 37);
    CHECK(ipr >= 1.0 / 37.0 - 1e-12);
    CHECK(ipr <= 1.0 + 1e-12);
  }
}

TEST_CASE("tail fit recovers synthetic decay lengths") {
  for (double lambda0 : {1.6, 0.7, 3.2}) {
    ProbabilityDistribution d;
    d.p.resize(41);
    d.site_offset = -20;
    for (int i = 0; i < 41; ++i)
      d.p(i) = std::exp(-2.0 * std::abs(d.site_of(i)) / lambda0);
    d.p /= d.p.sum();
    LocalizationFit fit = fit_localization_length(d);
    CHECK(fit.lambda == doctest::Approx(lambda0).epsilon(1e-6));
    CHECK(fit.residual < 1e-10);
  }
}

TEST_CASE("tail fit rejects unusable windows") {
  ProbabilityDistribution d;
  d.p = Eigen::VectorXd::Zero(41);
  d.site_offset = -20;
  d.p(d.col_of(0)) = 1.0;
  CHECK_THROWS_AS(fit_localization_length(d), NonPositiveProbability);

  ProbabilityDistribution tiny;
  tiny.p = Eigen::VectorXd::Constant(3, 1.0 / 3.0);
  tiny.site_offset = -1;
  CHECK_THROWS_AS(fit_localization_length(tiny), DegenerateWindow);
}

TEST_CASE("strong coupling localizes the ensemble mean") {
  WalkParams p = open_params(401, 200, 3.0 * kPi / 8.0);
  EnsembleConfig c;
  c.n_samples = 400;
  c.seed = 5;
  // A single snapshot only populates sites of one parity, so the tail is
  // probed on the average of two consecutive times.
  EnsembleResult r = run_ensemble(p, {199, 200}, c);
  ProbabilityDistribution mean = r.mean_p[0];
  mean.p = 0.5 * (r.mean_p[0].p + r.mean_p[1].p);
  LocalizationFit fit = fit_localization_length(mean);
  CHECK(fit.lambda > 6.0);
  CHECK(fit.lambda < 12.0);
  // The envelope must be far inside what free spreading would cover.
  CHECK(mean.p(mean.col_of(0)) > 0.1);
  CHECK(mean.p(mean.col_of(60)) < 1e-5);
}

// ===== Series bookkeeping =====

TEST_CASE("series validation") {
  ObservableSeries s;
  s.label = "variance";
  s.times = {1, 2, 3};
  s.values = {0.5, 1.0, 1.5};
  CHECK_NOTHROW(validate(s));

  s.values.pop_back();
  CHECK_THROWS_AS(validate(s), ValidationError);

  s.values = {0.5, 1.0, 1.5};
  s.times = {1, 3, 3};
  CHECK_THROWS_AS(validate(s), ValidationError);
}

TEST_CASE("ensemble configuration validation") {
  EnsembleConfig c;
  c.n_samples = 0;
  CHECK_THROWS_AS(validate(c, 10), ValidationError);
  c.n_samples = 1;
  c.workers = 0;
  CHECK_THROWS_AS(validate(c, 10), ValidationError);
}
