#include "spinwalk/walk_core.hpp"

#include <cmath>
#include <string>

namespace spinwalk {

// ===== Validation =====

void validate(const WalkParams& p) {
  if (p.n_sites < 2) throw ValidationError("n_sites must be at least 2");
  if (p.steps < 0) throw ValidationError("steps must be nonnegative");
  if (p.boundary == Boundary::open) {
    if (p.n_sites % 2 == 0) throw ValidationError("open lattice needs odd n_sites");
    if (p.n_sites < 2 * p.steps + 1)
      throw ValidationError("open lattice too small: need n_sites >= 2*steps + 1, got " +
                            std::to_string(p.n_sites) + " for " + std::to_string(p.steps) +
                            " steps");
  }
  if (!(p.theta >= 0.0 && p.theta < 2.0 * kPi))
    throw ValidationError("theta outside [0, 2*pi)");
  if (!(p.phi >= 0.0 && p.phi < 2.0 * kPi)) throw ValidationError("phi outside [0, 2*pi)");
  const double nrm = std::norm(p.coin_init(0)) + std::norm(p.coin_init(1));
  if (std::abs(nrm - 1.0) > 1e-12) throw ValidationError("coin_init is not normalized");
  if (!p.spin_init.empty()) {
    if (static_cast<int>(p.spin_init.size()) != p.n_sites)
      throw ValidationError("spin_init length must equal n_sites");
    for (int b : p.spin_init)
      if (b != 0 && b != 1) throw ValidationError("spin_init entries must be 0 or 1");
  }
}

SpinSector sector_from_id(std::uint64_t id, int n_sites) {
  SpinSector sec;
  sec.signs.resize(n_sites);
  for (int j = 0; j < n_sites; ++j) sec.signs[j] = (id >> j) & 1u ? -1 : +1;
  return sec;
}

SectorState initial_sector_state(const WalkParams& p) {
  SectorState s;
  s.amp = Eigen::Matrix2Xcd::Zero(2, p.n_sites);
  s.site_offset = p.boundary == Boundary::open ? -(p.n_sites - 1) / 2 : 0;
  s.boundary = p.boundary;
  const int c0 = s.col_of(0);
  s.amp(0, c0) = p.coin_init(0);
  s.amp(1, c0) = p.coin_init(1);
  return s;
}

// ===== Elementary operations =====

Eigen::Matrix2cd coin_matrix(double theta) {
  const double c = std::cos(theta), sn = std::sin(theta);
  Eigen::Matrix2cd m;
  m << cplx(c, 0.0), cplx(0.0, -sn), cplx(0.0, -sn), cplx(c, 0.0);
  return m;
}

void apply_coin(SectorState& s, double theta) { s.amp = coin_matrix(theta) * s.amp; }

void apply_shift(SectorState& s) {
  const int n = s.n_sites();
  Eigen::Matrix2Xcd out = Eigen::Matrix2Xcd::Zero(2, n);
  if (s.boundary == Boundary::open) {
    if (s.amp(0, n - 1) != cplx(0.0) || s.amp(1, 0) != cplx(0.0))
      throw EdgeOverflow("walker amplitude would leave the lattice");
    out.row(0).segment(1, n - 1) = s.amp.row(0).segment(0, n - 1);
    out.row(1).segment(0, n - 1) = s.amp.row(1).segment(1, n - 1);
  } else {
    for (int i = 0; i < n; ++i) {
      out(0, (i + 1) % n) = s.amp(0, i);
      out(1, i) = s.amp(1, (i + 1) % n);
    }
  }
  s.amp.swap(out);
}

void apply_disorder_phase(SectorState& s, const SpinSector& sector, double phi) {
  if (static_cast<int>(sector.signs.size()) != s.n_sites())
    throw LengthMismatch("sector has " + std::to_string(sector.signs.size()) +
                         " signs for " + std::to_string(s.n_sites()) + " sites");
  const cplx plus = std::polar(1.0, phi), minus = std::polar(1.0, -phi);
  for (int i = 0; i < s.n_sites(); ++i) {
    const cplx f = sector.signs[i] > 0 ? plus : minus;
    s.amp(0, i) *= f;
    s.amp(1, i) *= f;
  }
}

// ===== Evolution =====

void sector_step(SectorState& s, const SpinSector& sector, const WalkParams& p) {
  apply_disorder_phase(s, sector, p.phi);
  apply_coin(s, p.theta);
  apply_shift(s);
}

void evolve_sector_observe(SectorState& state, const SpinSector& sector, const WalkParams& p,
                           int t, const std::vector<int>& snapshot_times,
                           const std::function<void(int, const SectorState&)>& observe) {
  for (std::size_t i = 1; i < snapshot_times.size(); ++i)
    if (snapshot_times[i] <= snapshot_times[i - 1])
      throw ValidationError("snapshot times must be strictly ascending");
  if (!snapshot_times.empty() &&
      (snapshot_times.front() < 0 || snapshot_times.back() > t))
    throw ValidationError("snapshot time outside [0, t]");
  const double norm_in = state.norm_sq();
  std::size_t next = 0;
  auto emit = [&](int time) {
    while (next < snapshot_times.size() && snapshot_times[next] == time) {
      observe(time, state);
      ++next;
    }
  };
  emit(0);
  for (int step = 1; step <= t; ++step) {
    sector_step(state, sector, p);
    emit(step);
  }
  const double drift = std::abs(state.norm_sq() - norm_in);
  if (drift > 1e-10)
    throw ValidationError("norm drifted by " + std::to_string(drift) + " during evolution");
}

std::vector<SectorState> evolve_sector(const SectorState& initial, const SpinSector& sector,
                                       const WalkParams& p, int t,
                                       const std::vector<int>& snapshot_times) {
  SectorState state = initial;
  std::vector<SectorState> out;
  out.reserve(snapshot_times.size());
  evolve_sector_observe(state, sector, p, t, snapshot_times,
                        [&out](int, const SectorState& s) { out.push_back(s); });
  return out;
}

Eigen::VectorXd position_distribution(const SectorState& s) {
  return s.amp.colwise().squaredNorm().transpose();
}

}  // namespace spinwalk
