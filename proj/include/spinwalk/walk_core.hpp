#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "spinwalk/common.hpp"

namespace spinwalk {

enum class Boundary { open, periodic };

// Parameters of one walk.  Open lattices are odd-sized with the walker at the
// center and must satisfy n_sites >= 2*steps + 1 so no amplitude ever reaches
// an edge.  Periodic lattices wrap instead and may be any size >= 2.
struct WalkParams {
  int n_sites = 0;
  int steps = 0;
  double theta = kPi / 4.0;
  double phi = 0.0;
  Boundary boundary = Boundary::open;
  Eigen::Vector2cd coin_init{cplx(1.0 / 1.4142135623730951, 0.0),
                             cplx(1.0 / 1.4142135623730951, 0.0)};
  std::vector<int> spin_init;  // Z-basis bits per site; empty = all |0>
};

// Throws ValidationError on any contract violation.
void validate(const WalkParams& p);

// X-eigenvalue labels s_n = +-1 of one spin sector.
struct SpinSector {
  std::vector<int> signs;
};

// Sector id bit j set means signs[j] = -1; id 0 is the all-(+1) sector.
SpinSector sector_from_id(std::uint64_t id, int n_sites);

// Walker amplitudes a_{c,i} of a single sector.  Row c is the coin state,
// column i the array site; lattice coordinate n = i + site_offset.
struct SectorState {
  Eigen::Matrix2Xcd amp;
  int site_offset = 0;
  Boundary boundary = Boundary::open;

  int n_sites() const { return static_cast<int>(amp.cols()); }
  int col_of(int n) const { return n - site_offset; }
  int site_of(int col) const { return col + site_offset; }
  double norm_sq() const { return amp.squaredNorm(); }
};

// Walker at the center site (n=0) with params.coin_init.
SectorState initial_sector_state(const WalkParams& p);

// exp(-i*theta*X) = [[cos, -i sin], [-i sin, cos]].
Eigen::Matrix2cd coin_matrix(double theta);

void apply_coin(SectorState& s, double theta);

// Coin-0 amplitudes move n -> n+1, coin-1 amplitudes n -> n-1.
// Open boundary: throws EdgeOverflow if nonzero amplitude would leave.
void apply_shift(SectorState& s);

// Multiplies the amplitude at site n by exp(i*phi*s_n).
void apply_disorder_phase(SectorState& s, const SpinSector& sector, double phi);

// One application of the sector step: disorder phase, then coin, then shift.
void sector_step(SectorState& s, const SpinSector& sector, const WalkParams& p);

// Evolves `t` steps, returning copies of the state at the requested times
// (time 0 = initial state allowed).  snapshot_times must be sorted ascending.
std::vector<SectorState> evolve_sector(const SectorState& initial, const SpinSector& sector,
                                       const WalkParams& p, int t,
                                       const std::vector<int>& snapshot_times);

// Streaming variant used by the ensemble loop: invokes observe(t, state)
// at each requested time without storing copies.
void evolve_sector_observe(SectorState& state, const SpinSector& sector, const WalkParams& p,
                           int t, const std::vector<int>& snapshot_times,
                           const std::function<void(int, const SectorState&)>& observe);

// P_n = sum_c |a_{c,n}|^2, indexed like the state columns.
Eigen::VectorXd position_distribution(const SectorState& s);

}  // namespace spinwalk
