#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "spinwalk/exact.hpp"
#include "spinwalk/gates.hpp"

namespace spinwalk {

// Singular values with sigma^2 < tol (weight rule) or sigma < tol (value
// rule) are discarded; survivors are rescaled to unit total weight.
enum class TruncRule { weight, value };

struct MpsOptions {
  double trunc_tol = 1e-8;
  TruncRule rule = TruncRule::weight;
  int max_bond = 1024;
  bool hard_cap = false;
};

// Site tensors stored as (left_bond) x (6 * right_bond), column q*Dr + r.
// Tensors left of `center` are left-orthonormal, right of it right-
// orthonormal; the center tensor carries the norm.
struct MpsState {
  std::vector<Eigen::MatrixXcd> a;
  int phys = 6;
  int center = 0;
  int site_offset = 0;
  Boundary boundary = Boundary::open;
  MpsOptions opt;
  double discarded_weight = 0.0;
  long cap_hits = 0;
  // Schmidt spectrum per bond, refreshed by every step; valid for the state
  // the step produced.
  std::vector<Eigen::VectorXd> bond_sigma;
  // Walker count strictly left of each bond (n_sites+1 entries, boundaries
  // included).  Walker number is conserved, so bond bases stay sector-pure
  // and every factorization splits into independent blocks.  Invalidated by
  // gates that mix site occupancy; rebuilt on demand.
  std::vector<Eigen::VectorXi> bond_tag;
  bool tags_valid = false;
  int window_lo = 0, window_hi = 0;

  int n_sites() const { return static_cast<int>(a.size()); }
  int col_of(int n) const { return n - site_offset; }
  int site_of(int col) const { return col + site_offset; }
  int bond_dim(int bond) const { return static_cast<int>(a[bond + 1].rows()); }
  int max_bond_dim() const;
  double norm_sq() const { return a[center].squaredNorm(); }
};

MpsState mps_init(const WalkParams& p, const MpsOptions& opt = {});

// Contracts a 6x6 unitary into one site's physical index.
void apply_onsite(MpsState& m, int site, const Eigen::MatrixXcd& gate);

// Contracts a 36x36 gate into the bond's two-site tensor, splits by SVD with
// truncation, and moves the center one site in the sweep direction.  The
// center must already sit on one of the bond's sites.
void apply_bond_gate(MpsState& m, int bond, const Eigen::MatrixXcd& gate, bool move_right);

// Moves the center by QR/LQ without truncation.
void canonicalize_center(MpsState& m, int site);

// One full step: on-site coin+interaction everywhere, left-to-right sweep of
// left-hop gates, right-to-left sweep of right-hop gates, then a
// recanonicalization pass.  Periodic chains additionally transport the two
// wrap-around components via a marker species padded into the local basis.
void mps_step(MpsState& m, const WalkParams& p);

// Evolves t steps invoking observe(time, state) at each requested time.
void mps_evolve(MpsState& m, const WalkParams& p, int t, const std::vector<int>& snapshot_times,
                const std::function<void(int, MpsState&)>& observe);

double bond_entropy(MpsState& m, int bond);

// Entropy at every bond from the spectra cached by the last step.
Eigen::VectorXd bond_entropy_profile(const MpsState& m);

double local_expectation(MpsState& m, int site_col, SpinAxis axis);

ProbabilityDistribution walker_distribution_mps(MpsState& m);

void apply_field(MpsState& m, double phi_prime);

// Amplitudes in the dense single-walker layout, for cross-checks on small
// lattices.
ExactState mps_reconstruct_dense(const MpsState& m);

}  // namespace spinwalk
