#pragma once

#include <vector>

#include "spinwalk/walk_core.hpp"

namespace spinwalk {

// One eigenpair of one sector unitary at one coupling value.
struct SpectrumRecord {
  double quasi_energy = 0.0;  // in (-pi, pi]
  double ipr = 0.0;           // in (0, 1]
  std::uint64_t sector_id = 0;
  double phi = 0.0;
};

// Step unitary T*C*D of one sector on the ring, as a dense 2N x 2N matrix.
// Basis index is c*N + n (coin-major, site within coin block).
Eigen::MatrixXcd sector_unitary_matrix(const SpinSector& sector, const WalkParams& params);

struct QuasiPair {
  double energy = 0.0;
  Eigen::VectorXcd vec;
};

// Eigen decomposition of a unitary via its commuting Hermitian and
// anti-Hermitian parts, so eigenvectors come out orthonormal even inside
// degenerate eigenvalue clusters.  E = -arg(lambda) mapped to (-pi, pi].
// Throws NonUnitaryInput if max |(U*U - I)_ij| > 1e-10.
std::vector<QuasiPair> quasi_energies(const Eigen::MatrixXcd& u);

// Walker-marginal participation ratio of one eigenvector: p_n = sum_c |v_cn|^2,
// result (n_norm * sum p_n^2)^(-1).
double eigenstate_ipr(const Eigen::VectorXcd& vec, int n_norm);

struct SectorSource {
  bool exhaustive = true;
  std::uint64_t count = 0;  // sampled mode: number of sectors
  std::uint64_t seed = 0;
  bool allow_large = false;  // lifts the 2^14 exhaustive budget guard
};

// Full sweep: one record per (phi, sector, eigenpair).  IPRs of records whose
// quasi-energies agree within degeneracy_tol at the same phi are replaced by
// their group mean.  Record order is deterministic: phi index, then sector,
// then ascending quasi-energy.
std::vector<SpectrumRecord> spectrum_sweep(const std::vector<double>& phi_grid,
                                           const SectorSource& source,
                                           const WalkParams& params,
                                           double degeneracy_tol = 1e-8);

// Gaps of the quasi-energy set on the circle at fixed phi, widest first,
// keeping only gaps wider than threshold.  An empty result means no gap
// exceeds the threshold (spectrum effectively gapless at that resolution).
std::vector<double> band_gaps(const std::vector<SpectrumRecord>& records,
                              double threshold = 0.1);

}  // namespace spinwalk
