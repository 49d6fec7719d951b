#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "spinwalk/exact.hpp"
#include "spinwalk/linalg.hpp"

using namespace spinwalk;

namespace {

WalkParams open_params(int n_sites, int steps, double phi) {
  WalkParams p;
  p.n_sites = n_sites;
  p.steps = steps;
  p.phi = phi;
  return p;
}

WalkParams ring_params(int n_sites, double phi) {
  WalkParams p;
  p.n_sites = n_sites;
  p.phi = phi;
  p.boundary = Boundary::periodic;
  return p;
}

}  // namespace

// ===== Singular value plumbing =====

TEST_CASE("economy SVD reconstructs and orders") {
  std::mt19937 rng(2);
  std::normal_distribution<double> g;
  Eigen::MatrixXcd m(7, 5);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 5; ++j) m(i, j) = cplx(g(rng), g(rng));
  Svd svd = svd_economy(m);
  CHECK((svd.u * svd.s.asDiagonal() * svd.vh - m).cwiseAbs().maxCoeff() < 1e-12);
  for (int i = 1; i < svd.s.size(); ++i) CHECK(svd.s(i) <= svd.s(i - 1));

  Eigen::VectorXd sv = singular_values(m);
  CHECK((sv - svd.s).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("entropy of reference Schmidt vectors") {
  Eigen::VectorXd flat = Eigen::VectorXd::Constant(4, 0.5);
  CHECK(entropy_bits(flat) == doctest::Approx(2.0).epsilon(1e-12));
  Eigen::VectorXd pure = Eigen::VectorXd::Zero(3);
  pure(0) = 1.0;
  CHECK(entropy_bits(pure) == doctest::Approx(0.0).epsilon(1e-12));
}

// ===== Initial state and first step =====

TEST_CASE("initial state is a delta with product spins") {
  WalkParams p = open_params(5, 1, 0.9);
  ExactState st = initial_exact_state(p);
  CHECK(std::abs(st.amp.squaredNorm() - 1.0) < 1e-12);
  ProbabilityDistribution d = exact_walker_distribution(st);
  CHECK(d.p(d.col_of(0)) == doctest::Approx(1.0).epsilon(1e-12));
  for (int j = 0; j < 5; ++j) {
    CHECK(exact_spin_expectation(st, j, SpinAxis::z) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(exact_spin_expectation(st, j, SpinAxis::x)) < 1e-12);
    CHECK(std::abs(exact_spin_expectation(st, j, SpinAxis::y)) < 1e-12);
  }
  for (int b = 0; b < 4; ++b) CHECK(exact_bond_entropy(st, b) < 1e-12);
}

TEST_CASE("memory guard rejects oversized lattices") {
  WalkParams p = ring_params(15, 0.0);
  CHECK_THROWS_AS(initial_exact_state(p), ValidationError);
}

TEST_CASE("one step rotates only the origin spin and splits the walker") {
  const double phi = 0.9;
  WalkParams p = open_params(5, 1, phi);
  ExactState st = initial_exact_state(p);
  exact_step(st, p);

  ProbabilityDistribution d = exact_walker_distribution(st);
  CHECK(d.p(d.col_of(-1)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(d.p(d.col_of(1)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(d.p.sum() - 1.0) < 1e-12);

  const int c0 = st.col_of(0);
  CHECK(exact_spin_expectation(st, c0, SpinAxis::z) ==
        doctest::Approx(std::cos(2 * phi)).epsilon(1e-12));
  CHECK(exact_spin_expectation(st, c0, SpinAxis::y) ==
        doctest::Approx(-std::sin(2 * phi)).epsilon(1e-12));
  CHECK(std::abs(exact_spin_expectation(st, c0, SpinAxis::x)) < 1e-12);
  for (int j : {0, 1, 3, 4})
    CHECK(exact_spin_expectation(st, j, SpinAxis::z) == doctest::Approx(1.0).epsilon(1e-12));

  // Spins stay product; the only entanglement is the walker's side.
  CHECK(exact_bond_entropy(st, c0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(exact_bond_entropy(st, 0) < 1e-12);
}

TEST_CASE("zero coupling leaves the spin register alone") {
  WalkParams p = ring_params(8, 0.0);
  ExactState st = initial_exact_state(p);
  std::vector<int> ts = {10};
  exact_evolve(st, p, 10, ts, [](int, const ExactState&) {});

  SectorState ref = initial_sector_state(p);
  SpinSector uni;
  uni.signs.assign(8, +1);
  auto snap = evolve_sector(ref, uni, p, 10, {10});
  Eigen::VectorXd pw = position_distribution(snap[0]);
  ProbabilityDistribution d = exact_walker_distribution(st);
  CHECK((d.p - pw).cwiseAbs().maxCoeff() < 1e-13);
  for (int j = 0; j < 8; ++j)
    CHECK(exact_spin_expectation(st, j, SpinAxis::z) == doctest::Approx(1.0).epsilon(1e-12));
}

// ===== Cross-engine theorem =====

TEST_CASE("dense evolution equals the exhaustive sector ensemble") {
  WalkParams p = ring_params(8, kPi / 4.0);
  ExactState st = initial_exact_state(p);
  exact_evolve(st, p, 20, {20}, [](int, const ExactState&) {});
  ProbabilityDistribution pd = exact_walker_distribution(st);

  EnsembleConfig c;
  c.exhaustive = true;
  ProbabilityDistribution pe = ensemble_distribution(p, 20, c);
  CHECK((pd.p - pe.p).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("spin-basis rotation block-diagonalizes the evolution") {
  const int n = 6, t = 5;
  WalkParams p = ring_params(n, 1.3);
  p.theta = 0.6;
  const std::uint64_t dim = std::uint64_t{1} << n;
  const double root = std::pow(2.0, -0.5 * n);

  ExactState st = initial_exact_state(p);
  for (int k = 0; k < t; ++k) exact_step(st, p);

  // Per X-eigenvalue block: the dense amplitudes Hadamard-transform into
  // sector walkers; the site phase e^{-i phi s} corresponds to flipped signs
  // under the engine's e^{+i phi s} convention.
  Eigen::VectorXcd rebuilt = Eigen::VectorXcd::Zero(st.amp.size());
  ExactState init = initial_exact_state(p);
  for (std::uint64_t x = 0; x < dim; ++x) {
    SectorState block;
    block.amp = Eigen::Matrix2Xcd::Zero(2, n);
    block.boundary = Boundary::periodic;
    for (int coin = 0; coin < 2; ++coin)
      for (int pos = 0; pos < n; ++pos) {
        cplx acc = 0.0;
        for (std::uint64_t z = 0; z < dim; ++z) {
          const int par = __builtin_popcountll(x & z) & 1;
          acc += (par ? -root : root) * init.amp(init.index(coin, pos, z));
        }
        block.amp(coin, pos) = acc;
      }
    SpinSector sec;
    sec.signs.resize(n);
    for (int j = 0; j < n; ++j) sec.signs[j] = (x >> j) & 1u ? +1 : -1;
    for (int k = 0; k < t; ++k) sector_step(block, sec, p);
    for (int coin = 0; coin < 2; ++coin)
      for (int pos = 0; pos < n; ++pos)
        for (std::uint64_t z = 0; z < dim; ++z) {
          const int par = __builtin_popcountll(x & z) & 1;
          rebuilt(st.index(coin, pos, z)) += (par ? -root : root) * block.amp(coin, pos);
        }
  }
  CHECK((rebuilt - st.amp).cwiseAbs().maxCoeff() < 1e-12);
}

// ===== Unitarity, reversibility, conservation =====

TEST_CASE("evolution is unitary and reversible") {
  WalkParams p = ring_params(6, 1.234);
  p.theta = 0.77;
  ExactState st = initial_exact_state(p);
  const Eigen::VectorXcd start = st.amp;
  for (int k = 0; k < 100; ++k) {
    exact_step(st, p);
    CHECK(std::abs(st.amp.squaredNorm() - 1.0) < 1e-12);
  }
  for (int k = 0; k < 100; ++k) exact_step_adjoint(st, p);
  CHECK((st.amp - start).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("every site's X expectation is conserved for arbitrary states") {
  WalkParams p = ring_params(5, 2.1);
  p.theta = 1.9;
  ExactState st = initial_exact_state(p);
  std::mt19937 rng(31);
  std::normal_distribution<double> g;
  for (int i = 0; i < st.amp.size(); ++i) st.amp(i) = cplx(g(rng), g(rng));
  st.amp /= std::sqrt(st.amp.squaredNorm());

  std::vector<double> x0;
  for (int j = 0; j < 5; ++j) x0.push_back(exact_spin_expectation(st, j, SpinAxis::x));
  for (int k = 0; k < 10; ++k) exact_step(st, p);
  for (int j = 0; j < 5; ++j)
    CHECK(exact_spin_expectation(st, j, SpinAxis::x) ==
          doctest::Approx(x0[j]).epsilon(1e-12));
}

TEST_CASE("walker running off the open lattice is caught") {
  WalkParams p = open_params(3, 1, 0.4);
  ExactState st = initial_exact_state(p);
  exact_step(st, p);
  CHECK_THROWS_AS(exact_step(st, p), EdgeOverflow);
}

// ===== Entropies =====

TEST_CASE("hand-built Bell pair across the bond") {
  WalkParams p = ring_params(2, 0.0);
  ExactState st = initial_exact_state(p);
  st.amp.setZero();
  const double r = 1.0 / std::sqrt(2.0);
  st.amp(st.index(0, 0, 0b00)) = r;
  st.amp(st.index(0, 0, 0b11)) = r;
  CHECK(exact_bond_entropy(st, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("long-run entropy saturates on a small ring") {
  WalkParams p = ring_params(6, 3.0 * kPi / 8.0);
  ExactState st = initial_exact_state(p);
  double s_mid = 0.0, s_end = 0.0;
  exact_evolve(st, p, 1000, {800, 1000}, [&](int time, const ExactState& s) {
    const double e = exact_bond_entropy(s, 2);
    if (time == 800)
      s_mid = e;
    else
      s_end = e;
  });
  CHECK(s_end > 1.5);
  CHECK(s_mid == doctest::Approx(s_end).epsilon(0.25));
}
