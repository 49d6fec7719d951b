#include "spinwalk/exact.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "spinwalk/linalg.hpp"

namespace spinwalk {

namespace {

constexpr int kMaxSites = 14;

// In-place rotation exp(-i*angle*X) on spin bit `bit` of one contiguous
// (coin, position) block.
void rotate_bit(cplx* block, int n_sites, int bit, double c, double s) {
  const std::uint64_t dim = std::uint64_t{1} << n_sites;
  const std::uint64_t half = std::uint64_t{1} << bit;
  const cplx mis(0.0, -s);
  for (std::uint64_t base = 0; base < dim; base += half << 1)
    for (std::uint64_t off = 0; off < half; ++off) {
      cplx& a = block[base + off];
      cplx& b = block[base + off + half];
      const cplx a0 = a;
      a = c * a0 + mis * b;
      b = mis * a0 + c * b;
    }
}

}  // namespace

ExactState initial_exact_state(const WalkParams& p) {
  validate(p);
  if (p.n_sites > kMaxSites)
    throw ValidationError("dense evolution capped at " + std::to_string(kMaxSites) +
                          " sites");
  ExactState st;
  st.n_sites = p.n_sites;
  st.site_offset = p.boundary == Boundary::open ? -(p.n_sites - 1) / 2 : 0;
  st.boundary = p.boundary;
  st.amp = Eigen::VectorXcd::Zero(std::size_t{2} * p.n_sites << p.n_sites);

  std::uint64_t spins = 0;
  for (std::size_t j = 0; j < p.spin_init.size(); ++j)
    if (p.spin_init[j]) spins |= std::uint64_t{1} << j;
  const int center = st.col_of(0);
  st.amp(st.index(0, center, spins)) = p.coin_init(0);
  st.amp(st.index(1, center, spins)) = p.coin_init(1);
  return st;
}

// ===== Stepping =====

namespace {

void apply_spin_rotations(ExactState& st, double phi) {
  if (phi == 0.0) return;
  const double c = std::cos(phi), s = std::sin(phi);
  for (int coin = 0; coin < 2; ++coin)
    for (int pos = 0; pos < st.n_sites; ++pos)
      rotate_bit(st.amp.data() + st.index(coin, pos, 0), st.n_sites, pos, c, s);
}

void apply_coin_mix(ExactState& st, double theta) {
  const std::uint64_t dim = std::uint64_t{1} << st.n_sites;
  const cplx cc(std::cos(theta), 0.0), ms(0.0, -std::sin(theta));
  Eigen::VectorXcd tmp(dim);
  for (int pos = 0; pos < st.n_sites; ++pos) {
    auto a0 = st.amp.segment(st.index(0, pos, 0), dim);
    auto a1 = st.amp.segment(st.index(1, pos, 0), dim);
    tmp = a0;
    a0 = cc * tmp + ms * a1;
    a1 = ms * tmp + cc * a1;
  }
}

void apply_shift(ExactState& st, bool forward) {
  const std::uint64_t dim = std::uint64_t{1} << st.n_sites;
  const int n = st.n_sites;
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(st.amp.size());
  // Coin 0 moves +1 and coin 1 moves -1 when forward; reversed for adjoint.
  const int d0 = forward ? +1 : -1;
  if (st.boundary == Boundary::open) {
    const int edge0 = forward ? n - 1 : 0;
    const int edge1 = forward ? 0 : n - 1;
    if (st.amp.segment(st.index(0, edge0, 0), dim).squaredNorm() != 0.0 ||
        st.amp.segment(st.index(1, edge1, 0), dim).squaredNorm() != 0.0)
      throw EdgeOverflow("walker amplitude would leave the lattice");
    for (int pos = 0; pos < n; ++pos) {
      if (pos + d0 >= 0 && pos + d0 < n)
        out.segment(st.index(0, pos + d0, 0), dim) = st.amp.segment(st.index(0, pos, 0), dim);
      if (pos - d0 >= 0 && pos - d0 < n)
        out.segment(st.index(1, pos - d0, 0), dim) = st.amp.segment(st.index(1, pos, 0), dim);
    }
  } else {
    for (int pos = 0; pos < n; ++pos) {
      out.segment(st.index(0, (pos + d0 + n) % n, 0), dim) =
          st.amp.segment(st.index(0, pos, 0), dim);
      out.segment(st.index(1, (pos - d0 + n) % n, 0), dim) =
          st.amp.segment(st.index(1, pos, 0), dim);
    }
  }
  st.amp.swap(out);
}

}  // namespace

void exact_step(ExactState& state, const WalkParams& p) {
  apply_spin_rotations(state, p.phi);
  apply_coin_mix(state, p.theta);
  apply_shift(state, true);
}

void exact_step_adjoint(ExactState& state, const WalkParams& p) {
  apply_shift(state, false);
  apply_coin_mix(state, -p.theta);
  apply_spin_rotations(state, -p.phi);
}

void exact_evolve(ExactState& state, const WalkParams& p, int t,
                  const std::vector<int>& snapshot_times,
                  const std::function<void(int, const ExactState&)>& observe) {
  for (std::size_t i = 1; i < snapshot_times.size(); ++i)
    if (snapshot_times[i] <= snapshot_times[i - 1])
      throw ValidationError("snapshot times must be strictly ascending");
  if (!snapshot_times.empty() &&
      (snapshot_times.front() < 0 || snapshot_times.back() > t))
    throw ValidationError("snapshot time outside [0, t]");
  const double norm_in = state.amp.squaredNorm();
  std::size_t next = 0;
  auto emit = [&](int time) {
    while (next < snapshot_times.size() && snapshot_times[next] == time) {
      observe(time, state);
      ++next;
    }
  };
  emit(0);
  for (int step = 1; step <= t; ++step) {
    exact_step(state, p);
    emit(step);
  }
  if (std::abs(state.amp.squaredNorm() - norm_in) > 1e-10)
    throw ValidationError("norm drifted during dense evolution");
}

// ===== Observables =====

ProbabilityDistribution exact_walker_distribution(const ExactState& state) {
  const std::uint64_t dim = std::uint64_t{1} << state.n_sites;
  ProbabilityDistribution d;
  d.site_offset = state.site_offset;
  d.p = Eigen::VectorXd::Zero(state.n_sites);
  for (int coin = 0; coin < 2; ++coin)
    for (int pos = 0; pos < state.n_sites; ++pos)
      d.p(pos) += state.amp.segment(state.index(coin, pos, 0), dim).squaredNorm();
  return d;
}

double exact_spin_expectation(const ExactState& state, int site_col, SpinAxis axis) {
  if (site_col < 0 || site_col >= state.n_sites)
    throw ValidationError("spin site out of range");
  const std::uint64_t dim = std::uint64_t{1} << state.n_sites;
  const std::uint64_t bit = std::uint64_t{1} << site_col;
  double total = 0.0;
  for (int coin = 0; coin < 2; ++coin)
    for (int pos = 0; pos < state.n_sites; ++pos) {
      const cplx* block = state.amp.data() + state.index(coin, pos, 0);
      if (axis == SpinAxis::z) {
        for (std::uint64_t s = 0; s < dim; ++s)
          total += (s & bit) ? -std::norm(block[s]) : std::norm(block[s]);
      } else {
        for (std::uint64_t base = 0; base < dim; base += bit << 1)
          for (std::uint64_t off = 0; off < bit; ++off) {
            const cplx z = std::conj(block[base + off]) * block[base + off + bit];
            total += axis == SpinAxis::x ? 2.0 * z.real() : 2.0 * z.imag();
          }
      }
    }
  return total;
}

void exact_apply_field(ExactState& state, double phi_prime) {
  if (phi_prime == 0.0) return;
  const int n = state.n_sites;
  const std::uint64_t dim = std::uint64_t{1} << n;
  std::vector<cplx> phase(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) phase[k] = std::exp(cplx(0.0, phi_prime * (2.0 * k - n)));
  for (int coin = 0; coin < 2; ++coin)
    for (int pos = 0; pos < n; ++pos) {
      cplx* block = state.amp.data() + state.index(coin, pos, 0);
      for (std::uint64_t s = 0; s < dim; ++s)
        block[s] *= phase[static_cast<std::size_t>(std::popcount(s))];
    }
}

double exact_bond_entropy(const ExactState& state, int bond) {
  const int n = state.n_sites;
  if (bond < 0 || bond >= n - 1) throw ValidationError("bond index out of range");
  const int nl = bond + 1, nr = n - nl;
  const std::uint64_t dim_sl = std::uint64_t{1} << nl;
  const std::uint64_t dim_sr = std::uint64_t{1} << nr;
  const std::uint64_t mask_l = dim_sl - 1;
  // Left factor: (walker absent | 2*nl walker placements) x left spin bits.
  Eigen::MatrixXcd m =
      Eigen::MatrixXcd::Zero((2 * nl + 1) * dim_sl, (2 * nr + 1) * dim_sr);
  const std::uint64_t dim = std::uint64_t{1} << n;
  for (int coin = 0; coin < 2; ++coin)
    for (int pos = 0; pos < n; ++pos) {
      const cplx* block = state.amp.data() + state.index(coin, pos, 0);
      const std::uint64_t wl = pos <= bond ? 1 + 2 * pos + coin : 0;
      const std::uint64_t wr = pos <= bond ? 0 : 1 + 2 * (pos - nl) + coin;
      for (std::uint64_t s = 0; s < dim; ++s) {
        if (block[s] == cplx(0.0)) continue;
        m(wl * dim_sl + (s & mask_l), wr * dim_sr + (s >> nl)) += block[s];
      }
    }
  return entropy_bits(singular_values(m));
}

}  // namespace spinwalk
