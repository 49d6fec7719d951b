#include "spinwalk/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "spinwalk/ensemble.hpp"

namespace spinwalk {

Eigen::MatrixXcd sector_unitary_matrix(const SpinSector& sector, const WalkParams& params) {
  const int n = params.n_sites;
  if (static_cast<int>(sector.signs.size()) != n)
    throw LengthMismatch("sector length does not match n_sites");
  const Eigen::Matrix2cd c = coin_matrix(params.theta);
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  for (int site = 0; site < n; ++site) {
    const cplx d = std::polar(1.0, params.phi * sector.signs[site]);
    for (int cin = 0; cin < 2; ++cin) {
      const int col = cin * n + site;
      u((site + 1) % n, col) = c(0, cin) * d;          // coin 0 moves right
      u(n + (site - 1 + n) % n, col) = c(1, cin) * d;  // coin 1 moves left
    }
  }
  return u;
}

// ===== Unitary eigen decomposition =====

std::vector<QuasiPair> quasi_energies(const Eigen::MatrixXcd& u) {
  const int dim = static_cast<int>(u.rows());
  if (u.cols() != dim) throw NonUnitaryInput("matrix is not square");
  if ((u.adjoint() * u - Eigen::MatrixXcd::Identity(dim, dim)).cwiseAbs().maxCoeff() > 1e-10)
    throw NonUnitaryInput("matrix is not unitary at 1e-10");

  // Real and imaginary Hermitian parts commute for a unitary; joint
  // diagonalization keeps eigenvectors orthonormal inside degenerate clusters.
  const Eigen::MatrixXcd a = 0.5 * (u + u.adjoint());
  const Eigen::MatrixXcd b = cplx(0.0, -0.5) * (u - u.adjoint());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
  Eigen::VectorXd avals = es.eigenvalues();
  Eigen::MatrixXcd v = es.eigenvectors();

  constexpr double kClusterTol = 1e-7;
  std::vector<QuasiPair> out;
  out.reserve(dim);
  int lo = 0;
  while (lo < dim) {
    int hi = lo + 1;
    while (hi < dim && avals(hi) - avals(hi - 1) < kClusterTol) ++hi;
    const int k = hi - lo;
    Eigen::MatrixXcd block = v.middleCols(lo, k);
    if (k > 1) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> bs(block.adjoint() * b * block);
      block = block * bs.eigenvectors();
    }
    for (int j = 0; j < k; ++j) {
      QuasiPair qp;
      qp.vec = block.col(j);
      const cplx lambda = qp.vec.dot(u * qp.vec);  // Eigen dot conjugates lhs
      qp.energy = wrap_angle(-std::arg(lambda));
      out.push_back(std::move(qp));
    }
    lo = hi;
  }
  std::sort(out.begin(), out.end(),
            [](const QuasiPair& x, const QuasiPair& y) { return x.energy < y.energy; });
  return out;
}

double eigenstate_ipr(const Eigen::VectorXcd& vec, int n_norm) {
  if (n_norm <= 0) throw ValidationError("n_norm must be positive");
  const int n = static_cast<int>(vec.size()) / 2;
  double sum2 = 0.0;
  for (int site = 0; site < n; ++site) {
    const double p = std::norm(vec(site)) + std::norm(vec(n + site));
    sum2 += p * p;
  }
  return 1.0 / (n_norm * sum2);
}

// ===== Sweep =====

std::vector<SpectrumRecord> spectrum_sweep(const std::vector<double>& phi_grid,
                                           const SectorSource& source,
                                           const WalkParams& params,
                                           double degeneracy_tol) {
  const int n = params.n_sites;
  if (phi_grid.empty()) throw ValidationError("empty phi grid");
  if (source.exhaustive && n > 14 && !source.allow_large)
    throw BudgetExceeded("exhaustive spectra beyond 14 sites need an explicit override");
  if (!source.exhaustive && source.count < 1)
    throw ValidationError("sampled sector source needs count >= 1");

  std::vector<SpinSector> sectors;
  std::vector<std::uint64_t> ids;
  if (source.exhaustive) {
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t id = 0; id < total; ++id) {
      sectors.push_back(sector_from_id(id, n));
      ids.push_back(id);
    }
  } else {
    EnsembleConfig cfg;
    cfg.n_samples = source.count;
    cfg.seed = source.seed;
    sectors = sample_sectors(n, cfg);
    for (const auto& sec : sectors) {
      std::uint64_t id = 0;
      for (int j = 0; j < n; ++j)
        if (sec.signs[j] < 0) id |= std::uint64_t{1} << j;
      ids.push_back(id);
    }
  }

  std::vector<SpectrumRecord> records;
  records.reserve(phi_grid.size() * sectors.size() * 2 * n);
  for (double phi : phi_grid) {
    WalkParams p = params;
    p.phi = phi;
    const std::size_t phi_begin = records.size();
    for (std::size_t si = 0; si < sectors.size(); ++si) {
      Eigen::MatrixXcd u = sector_unitary_matrix(sectors[si], p);
      for (const QuasiPair& qp : quasi_energies(u)) {
        SpectrumRecord rec;
        rec.quasi_energy = qp.energy;
        rec.ipr = eigenstate_ipr(qp.vec, n);
        rec.sector_id = ids[si];
        rec.phi = phi;
        records.push_back(rec);
      }
    }
    // Mean IPR over quasi-energy-degenerate groups across all sectors at this
    // phi, so overlapping points carry one color.
    const std::size_t m = records.size() - phi_begin;
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return records[phi_begin + x].quasi_energy < records[phi_begin + y].quasi_energy;
    });
    std::size_t lo = 0;
    while (lo < m) {
      std::size_t hi = lo + 1;
      while (hi < m && records[phi_begin + order[hi]].quasi_energy -
                               records[phi_begin + order[hi - 1]].quasi_energy <
                           degeneracy_tol)
        ++hi;
      double mean = 0.0;
      for (std::size_t j = lo; j < hi; ++j) mean += records[phi_begin + order[j]].ipr;
      mean /= static_cast<double>(hi - lo);
      for (std::size_t j = lo; j < hi; ++j) records[phi_begin + order[j]].ipr = mean;
      lo = hi;
    }
  }
  return records;
}

std::vector<double> band_gaps(const std::vector<SpectrumRecord>& records, double threshold) {
  if (records.empty()) throw ValidationError("no records to scan for gaps");
  std::vector<double> es;
  es.reserve(records.size());
  for (const auto& r : records) es.push_back(r.quasi_energy);
  std::sort(es.begin(), es.end());
  std::vector<double> gaps;
  for (std::size_t i = 1; i < es.size(); ++i) {
    const double g = es[i] - es[i - 1];
    if (g > threshold) gaps.push_back(g);
  }
  const double wrap = es.front() + 2.0 * kPi - es.back();
  if (wrap > threshold) gaps.push_back(wrap);
  std::sort(gaps.rbegin(), gaps.rend());
  return gaps;
}

}  // namespace spinwalk
