#pragma once

#include <functional>
#include <vector>

#include "spinwalk/ensemble.hpp"
#include "spinwalk/walk_core.hpp"

namespace spinwalk {

// Dense state over coin x position x spin bitstrings, amplitude index
// (c*N + pos)*2^N + s with the spin bits fastest.  Spin bit j belongs to the
// site in column j.
struct ExactState {
  Eigen::VectorXcd amp;
  int n_sites = 0;
  int site_offset = 0;
  Boundary boundary = Boundary::open;

  std::size_t index(int c, int pos, std::uint64_t spins) const {
    return (static_cast<std::size_t>(c) * n_sites + pos) << n_sites | spins;
  }
  int col_of(int n) const { return n - site_offset; }
  int site_of(int col) const { return col + site_offset; }
};

// Walker at the center with params.coin_init; spins per params.spin_init
// (default all |0>).  Enforces n_sites <= 14.
ExactState initial_exact_state(const WalkParams& p);

/// One step: spin rotation exp(-i*phi*X) on the walker's site, coin, shift.
void exact_step(ExactState& state, const WalkParams& p);

// Inverse of exact_step.
void exact_step_adjoint(ExactState& state, const WalkParams& p);

// Evolves t steps invoking observe(time, state) at each requested time.
void exact_evolve(ExactState& state, const WalkParams& p, int t,
                  const std::vector<int>& snapshot_times,
                  const std::function<void(int, const ExactState&)>& observe);

ProbabilityDistribution exact_walker_distribution(const ExactState& state);

enum class SpinAxis { x, y, z };

double exact_spin_expectation(const ExactState& state, int site_col, SpinAxis axis);

// Z-axis field kick exp(-i*phi_prime*Z) on every site's spin.
void exact_apply_field(ExactState& state, double phi_prime);

// Von Neumann entropy (bits) across the bond between columns bond and bond+1,
// with the walker's presence/absence part of each side's factor.
double exact_bond_entropy(const ExactState& state, int bond);

}  // namespace spinwalk
