#include "spinwalk/mps.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include "spinwalk/linalg.hpp"
#include "spinwalk/walk_core.hpp"

namespace spinwalk {

namespace {

constexpr double kEdgeTol = 1e-12;

int right_dim(const MpsState& m, int site) {
  return static_cast<int>(m.a[site].cols()) / m.phys;
}

// (Dl x p*Dr) -> (p*Dl x Dr), row = q*Dl + d.
Eigen::MatrixXcd to_left(const Eigen::MatrixXcd& a, int phys) {
  const int dl = static_cast<int>(a.rows());
  const int dr = static_cast<int>(a.cols()) / phys;
  Eigen::MatrixXcd l(phys * dl, dr);
  for (int q = 0; q < phys; ++q) l.middleRows(q * dl, dl) = a.middleCols(q * dr, dr);
  return l;
}

Eigen::MatrixXcd from_left(const Eigen::MatrixXcd& l, int phys) {
  const int dl = static_cast<int>(l.rows()) / phys;
  const int dr = static_cast<int>(l.cols());
  Eigen::MatrixXcd a(dl, phys * dr);
  for (int q = 0; q < phys; ++q) a.middleCols(q * dr, dr) = l.middleRows(q * dl, dl);
  return a;
}

// ----- walker-count sectors -----
// Exactly one walker lives on the chain, so each bond basis vector carries a
// definite count of walkers strictly to its left.  Factorizations never mix
// the two sectors; doing them per block cuts the cubic cost roughly fourfold
// and keeps the forbidden blocks exactly zero.

int occ(int p) { return p >= 2 ? 1 : 0; }  // physical index 2q+s holds a walker iff q >= 1

// Row labels of a left-unfolded site tensor: left tag plus site occupancy.
Eigen::VectorXi unfold_row_tags(const Eigen::VectorXi& left) {
  const int dl = static_cast<int>(left.size());
  Eigen::VectorXi t(6 * dl);
  for (int p = 0; p < 6; ++p)
    for (int d = 0; d < dl; ++d) t(p * dl + d) = left(d) + occ(p);
  return t;
}

// Column labels of a site tensor: right tag minus site occupancy.
Eigen::VectorXi fold_col_tags(const Eigen::VectorXi& right) {
  const int dr = static_cast<int>(right.size());
  Eigen::VectorXi t(6 * dr);
  for (int p = 0; p < 6; ++p)
    for (int r = 0; r < dr; ++r) t(p * dr + r) = right(r) - occ(p);
  return t;
}

// Indices per sector; labels outside {0,1} address exactly-zero content and
// are dropped.
std::array<std::vector<int>, 2> sector_members(const Eigen::VectorXi& tags) {
  std::array<std::vector<int>, 2> out;
  for (int i = 0; i < tags.size(); ++i)
    if (tags(i) == 0 || tags(i) == 1) out[static_cast<std::size_t>(tags(i))].push_back(i);
  return out;
}

void move_center_right(MpsState& m) {
  const int k = m.center;
  if (m.tags_valid && m.phys == 6) {
    const Eigen::MatrixXcd l = to_left(m.a[k], 6);
    const auto rows = sector_members(unfold_row_tags(m.bond_tag[k]));
    const auto cols = sector_members(m.bond_tag[k + 1]);
    std::array<Qr, 2> f;
    int kk = 0;
    for (int s = 0; s < 2; ++s)
      if (!rows[s].empty() && !cols[s].empty()) {
        f[s] = qr_thin(l(rows[s], cols[s]));
        kk += static_cast<int>(f[s].q.cols());
      }
    Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(l.rows(), kk);
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(kk, l.cols());
    Eigen::VectorXi tag(kk);
    int off = 0;
    for (int s = 0; s < 2; ++s) {
      if (rows[s].empty() || cols[s].empty()) continue;
      const int ks = static_cast<int>(f[s].q.cols());
      q(rows[s], Eigen::seqN(off, ks)) = f[s].q;
      r(Eigen::seqN(off, ks), cols[s]) = f[s].r;
      tag.segment(off, ks).setConstant(s);
      off += ks;
    }
    m.a[k] = from_left(q, 6);
    m.a[k + 1] = r * m.a[k + 1];
    m.bond_tag[k + 1] = std::move(tag);
  } else {
    Qr f = qr_thin(to_left(m.a[k], m.phys));
    m.a[k] = from_left(f.q, m.phys);
    m.a[k + 1] = f.r * m.a[k + 1];
  }
  m.center = k + 1;
}

void move_center_left(MpsState& m) {
  const int k = m.center;
  Eigen::MatrixXcd lmat;
  if (m.tags_valid && m.phys == 6) {
    const auto rows = sector_members(m.bond_tag[k]);
    const auto cols = sector_members(fold_col_tags(m.bond_tag[k + 1]));
    std::array<Lq, 2> f;
    int kk = 0;
    for (int s = 0; s < 2; ++s)
      if (!rows[s].empty() && !cols[s].empty()) {
        f[s] = lq_thin(m.a[k](rows[s], cols[s]));
        kk += static_cast<int>(f[s].q.rows());
      }
    Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(kk, m.a[k].cols());
    lmat = Eigen::MatrixXcd::Zero(m.a[k].rows(), kk);
    Eigen::VectorXi tag(kk);
    int off = 0;
    for (int s = 0; s < 2; ++s) {
      if (rows[s].empty() || cols[s].empty()) continue;
      const int ks = static_cast<int>(f[s].q.rows());
      q(Eigen::seqN(off, ks), cols[s]) = f[s].q;
      lmat(rows[s], Eigen::seqN(off, ks)) = f[s].l;
      tag.segment(off, ks).setConstant(s);
      off += ks;
    }
    m.a[k] = std::move(q);
    m.bond_tag[k] = std::move(tag);
  } else {
    Lq f = lq_thin(m.a[k]);
    m.a[k] = std::move(f.q);
    lmat = std::move(f.l);
  }
  const int dl = static_cast<int>(lmat.rows());
  const int kdim = static_cast<int>(lmat.cols());
  const Eigen::MatrixXcd& prev = m.a[k - 1];
  Eigen::MatrixXcd next(prev.rows(), m.phys * kdim);
  for (int p = 0; p < m.phys; ++p)
    next.middleCols(p * kdim, kdim) = prev.middleCols(p * dl, dl) * lmat;
  m.a[k - 1] = std::move(next);
  m.center = k - 1;
}

// Physical-pair block swaps, the only structure the transport gates have.
struct PairSwap {
  int al, ar, bl, br;
};

std::vector<PairSwap> walker_swaps(std::initializer_list<std::array<int, 4>> qs) {
  std::vector<PairSwap> out;
  for (const auto& s : qs)
    for (int sl = 0; sl < 2; ++sl)
      for (int sr = 0; sr < 2; ++sr)
        out.push_back({2 * s[0] + sl, 2 * s[1] + sr, 2 * s[2] + sl, 2 * s[3] + sr});
  return out;
}

std::vector<PairSwap> hop_left_swaps(bool marked) {
  if (!marked) return walker_swaps({{{0, 2, 2, 0}}});
  return walker_swaps({{{0, 2, 2, 0}}, {{3, 0, 0, 3}}, {{3, 1, 1, 3}}, {{3, 2, 2, 3}}});
}

std::vector<PairSwap> hop_right_swaps(bool marked) {
  if (!marked) return walker_swaps({{{1, 0, 0, 1}}});
  return walker_swaps({{{1, 0, 0, 1}}, {{3, 0, 0, 3}}, {{3, 1, 1, 3}}, {{3, 2, 2, 3}}});
}

struct SplitResult {
  Eigen::MatrixXcd u, vh;
  Eigen::VectorXd sigma;
};

// Truncation index for a descending Schmidt vector; books the discarded weight.
int decide_keep(MpsState& m, const Eigen::VectorXd& s) {
  const double cut =
      m.opt.rule == TruncRule::weight ? std::sqrt(m.opt.trunc_tol) : m.opt.trunc_tol;
  int keep = 0;
  while (keep < s.size() && s(keep) >= cut) ++keep;
  keep = std::max(keep, 1);
  if (keep > m.opt.max_bond) {
    if (m.opt.hard_cap) throw BondDimOverflow("bond dimension cap exceeded");
    keep = m.opt.max_bond;
    ++m.cap_hits;
  }
  for (int i = keep; i < s.size(); ++i) m.discarded_weight += s(i) * s(i);
  return keep;
}

// Joint truncation across the two sector spectra (each descending).  The cut
// itself is a plain value threshold, but the keep-one floor and the bond cap
// act on the merged spectrum.
std::array<int, 2> decide_keep_sectors(MpsState& m, const std::array<Eigen::VectorXd, 2>& s) {
  const double cut =
      m.opt.rule == TruncRule::weight ? std::sqrt(m.opt.trunc_tol) : m.opt.trunc_tol;
  std::array<int, 2> keep{};
  for (int sec = 0; sec < 2; ++sec)
    while (keep[sec] < s[sec].size() && s[sec](keep[sec]) >= cut) ++keep[sec];
  if (keep[0] + keep[1] == 0) {
    const double m0 = s[0].size() > 0 ? s[0](0) : -1.0;
    const double m1 = s[1].size() > 0 ? s[1](0) : -1.0;
    if (m0 < 0.0 && m1 < 0.0) throw ValidationError("two-site tensor carries no amplitude");
    keep[m1 > m0 ? 1 : 0] = 1;
  }
  if (keep[0] + keep[1] > m.opt.max_bond) {
    if (m.opt.hard_cap) throw BondDimOverflow("bond dimension cap exceeded");
    std::array<int, 2> capped{};
    int i0 = 0, i1 = 0;
    for (int total = 0; total < m.opt.max_bond; ++total) {
      const double v0 = i0 < keep[0] ? s[0](i0) : -1.0;
      const double v1 = i1 < keep[1] ? s[1](i1) : -1.0;
      if (v0 >= v1) {
        ++i0;
        ++capped[0];
      } else {
        ++i1;
        ++capped[1];
      }
    }
    keep = capped;
    ++m.cap_hits;
  }
  for (int sec = 0; sec < 2; ++sec)
    for (int i = keep[sec]; i < s[sec].size(); ++i) m.discarded_weight += s[sec](i) * s[sec](i);
  return keep;
}

// Recovers walker-count labels for a state produced without them.  Requires
// every bond basis to be occupancy-pure: the left-walker-count operator must
// come out diagonal with entries 0 or 1 in each bond basis.
void rebuild_tags(MpsState& m) {
  const int n = m.n_sites();
  auto read_tags = [](const Eigen::MatrixXcd& w) {
    Eigen::VectorXi tag(w.rows());
    for (int i = 0; i < w.rows(); ++i) {
      const double v = w(i, i).real();
      const int t = v > 0.5 ? 1 : 0;
      if (std::abs(v - t) > 1e-8) throw ValidationError("bond basis mixes walker sectors");
      tag(i) = t;
    }
    Eigen::MatrixXcd off = w;
    off.diagonal().setZero();
    if (off.norm() > 1e-8) throw ValidationError("bond basis mixes walker sectors");
    return tag;
  };
  m.bond_tag.assign(static_cast<std::size_t>(n) + 1, Eigen::VectorXi());
  m.bond_tag[0] = Eigen::VectorXi::Zero(1);
  m.bond_tag[static_cast<std::size_t>(n)] = Eigen::VectorXi::Ones(1);
  Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(1, 1);
  for (int k = 0; k < m.center; ++k) {  // left-canonical side: walkers left of the bond
    const int dr = right_dim(m, k);
    Eigen::MatrixXcd nw = Eigen::MatrixXcd::Zero(dr, dr);
    for (int p = 0; p < 6; ++p) {
      const auto blk = m.a[k].middleCols(p * dr, dr);
      nw.noalias() += blk.adjoint() * (w * blk);
      if (occ(p)) nw.noalias() += blk.adjoint() * blk;
    }
    m.bond_tag[static_cast<std::size_t>(k) + 1] = read_tags(nw);
    w = std::move(nw);
  }
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(1, 1);
  for (int k = n - 1; k > m.center; --k) {  // right-canonical side: walkers right, negated
    const int dr = right_dim(m, k);
    const int dl = static_cast<int>(m.a[k].rows());
    Eigen::MatrixXcd nv = Eigen::MatrixXcd::Zero(dl, dl);
    for (int p = 0; p < 6; ++p) {
      const auto blk = m.a[k].middleCols(p * dr, dr);
      nv.noalias() += blk * (v * blk.adjoint());
      if (occ(p)) nv.noalias() += blk * blk.adjoint();
    }
    m.bond_tag[static_cast<std::size_t>(k)] = (1 - read_tags(nv).array()).matrix();
    v = std::move(nv);
  }
  m.tags_valid = true;
}

SplitResult split_truncate(MpsState& m, const Eigen::MatrixXcd& theta) {
  Svd svd = svd_economy(theta);
  const int keep = decide_keep(m, svd.s);
  SplitResult r;
  r.sigma = svd.s.head(keep) / svd.s.head(keep).norm();
  r.u = svd.u.leftCols(keep);
  r.vh = svd.vh.topRows(keep);
  return r;
}

Eigen::MatrixXcd build_theta(const MpsState& m, int bond) {
  const int p = m.phys;
  const int dl = static_cast<int>(m.a[bond].rows());
  const int dm = static_cast<int>(m.a[bond + 1].rows());
  const int dr = right_dim(m, bond + 1);
  Eigen::MatrixXcd theta(p * dl, p * dr);
  for (int q = 0; q < p; ++q)
    theta.middleRows(q * dl, dl) = m.a[bond].middleCols(q * dm, dm) * m.a[bond + 1];
  return theta;
}

void write_back(MpsState& m, int bond, const SplitResult& r, bool move_right) {
  if (move_right) {
    m.a[bond] = from_left(r.u, m.phys);
    m.a[bond + 1] = r.sigma.cast<cplx>().asDiagonal() * r.vh;
    m.center = bond + 1;
  } else {
    m.a[bond] = from_left(r.u * r.sigma.cast<cplx>().asDiagonal(), m.phys);
    m.a[bond + 1] = r.vh;
    m.center = bond;
  }
  m.bond_sigma[bond] = r.sigma;
}

// One transport bond inside an ordered sweep.  Sweep order guarantees the
// moving species has already vacated the trailing site of the bond, so on the
// states this ever sees the gate acts as (drop mover) x (drop mover) plus a
// single crossing channel.  The gated two-site tensor therefore factors
// through rank 2*Dm, and with walker-count sectors the factors split further
// into two independent blocks; the SVDs run on the small per-sector cores,
// never on the full 6Dl x 6Dr matrix.
void hop_bond_open(MpsState& m, int bond, bool left_mover, bool move_right) {
  if (m.center != bond && m.center != bond + 1)
    throw CenterMisplaced("transport gate applied away from the canonical center");
  const int dl = static_cast<int>(m.a[bond].rows());
  const int dm = static_cast<int>(m.a[bond + 1].rows());
  const int dr = right_dim(m, bond + 1);
  const Eigen::MatrixXcd al = to_left(m.a[bond], 6);
  const Eigen::MatrixXcd& br = m.a[bond + 1];
  const int mv = left_mover ? 2 : 1;                    // hopping species
  const int out_l = left_mover ? 2 : 0, in_l = left_mover ? 0 : 1;
  const int out_r = left_mover ? 0 : 1, in_r = left_mover ? 2 : 0;
  Eigen::MatrixXcd cat_l = Eigen::MatrixXcd::Zero(6 * dl, 2 * dm);
  cat_l.leftCols(dm) = al;
  cat_l.block(2 * mv * dl, 0, 2 * dl, dm).setZero();
  cat_l.block(2 * out_l * dl, dm, 2 * dl, dm) = al.middleRows(2 * in_l * dl, 2 * dl);
  Eigen::MatrixXcd cat_r = Eigen::MatrixXcd::Zero(2 * dm, 6 * dr);
  cat_r.topRows(dm) = br;
  cat_r.block(0, 2 * mv * dr, dm, 2 * dr).setZero();
  cat_r.block(dm, 2 * out_r * dr, dm, 2 * dr) = br.middleCols(2 * in_r * dr, 2 * dr);

  // The crossing channel moves the walker across the bond, shifting the
  // sector of the second block of inner columns by one.
  Eigen::VectorXi inner(2 * dm);
  inner.head(dm) = m.bond_tag[bond + 1];
  inner.tail(dm) = m.bond_tag[bond + 1].array() + (left_mover ? 1 : -1);
  const auto rows = sector_members(unfold_row_tags(m.bond_tag[bond]));
  const auto mids = sector_members(inner);
  const auto cols = sector_members(fold_col_tags(m.bond_tag[bond + 2]));

  std::array<Qr, 2> ql;
  std::array<Lq, 2> lr;
  std::array<Svd, 2> sv;
  std::array<bool, 2> live{};
  for (int s = 0; s < 2; ++s) {
    if (rows[s].empty() || mids[s].empty() || cols[s].empty()) continue;
    ql[s] = qr_thin(cat_l(rows[s], mids[s]));
    lr[s] = lq_thin(cat_r(mids[s], cols[s]));
    sv[s] = svd_economy(ql[s].r * lr[s].l);
    live[s] = true;
  }
  const std::array<int, 2> keep = decide_keep_sectors(
      m, {live[0] ? sv[0].s : Eigen::VectorXd(), live[1] ? sv[1].s : Eigen::VectorXd()});
  const int kk = keep[0] + keep[1];
  SplitResult r;
  r.u = Eigen::MatrixXcd::Zero(6 * dl, kk);
  r.vh = Eigen::MatrixXcd::Zero(kk, 6 * dr);
  r.sigma.resize(kk);
  Eigen::VectorXi tag(kk);
  int off = 0;
  for (int s = 0; s < 2; ++s) {
    if (keep[s] == 0) continue;
    r.u(rows[s], Eigen::seqN(off, keep[s])) = ql[s].q * sv[s].u.leftCols(keep[s]);
    r.vh(Eigen::seqN(off, keep[s]), cols[s]) = sv[s].vh.topRows(keep[s]) * lr[s].q;
    r.sigma.segment(off, keep[s]) = sv[s].s.head(keep[s]);
    tag.segment(off, keep[s]).setConstant(s);
    off += keep[s];
  }
  r.sigma /= r.sigma.norm();
  write_back(m, bond, r, move_right);
  m.bond_tag[bond + 1] = std::move(tag);
}

void hop_bond(MpsState& m, int bond, const std::vector<PairSwap>& swaps, bool move_right) {
  const int p = m.phys;
  const int dl = static_cast<int>(m.a[bond].rows());
  const int dr = right_dim(m, bond + 1);
  Eigen::MatrixXcd theta = build_theta(m, bond);
  Eigen::MatrixXcd tmp(dl, dr);
  for (const PairSwap& s : swaps) {
    auto a = theta.block(s.al * dl, s.ar * dr, dl, dr);
    auto b = theta.block(s.bl * dl, s.br * dr, dl, dr);
    tmp = a;
    a = b;
    b = tmp;
  }
  write_back(m, bond, split_truncate(m, theta), move_right);
}

void recanonicalize(MpsState& m, int lo, int hi) {
  canonicalize_center(m, lo);
  while (m.center < hi) move_center_right(m);
  while (m.center > lo) move_center_left(m);
}

// Probability of the given walker components in the center tensor.
double walker_weight(const MpsState& m, int site, int q_lo, int q_hi) {
  const int dr = right_dim(m, site);
  double w = 0.0;
  for (int q = q_lo; q <= q_hi; ++q)
    w += m.a[site].middleCols(2 * q * dr, 2 * dr).squaredNorm();
  return w;
}

void pad_to_marked(MpsState& m) {
  for (auto& t : m.a) {
    const int dr = static_cast<int>(t.cols()) / 6;
    Eigen::MatrixXcd wide = Eigen::MatrixXcd::Zero(t.rows(), 8 * dr);
    wide.leftCols(6 * dr) = t;
    t = std::move(wide);
  }
  m.phys = 8;
}

void unpad_marked(MpsState& m) {
  for (auto& t : m.a) {
    const int dr = static_cast<int>(t.cols()) / 8;
    if (t.rightCols(2 * dr).squaredNorm() > 1e-10)
      throw ValidationError("marker species left residual amplitude");
    t = Eigen::MatrixXcd(t.leftCols(6 * dr));
  }
  m.phys = 6;
}

Eigen::MatrixXcd marked_onsite(const Eigen::MatrixXcd& g6) {
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Identity(8, 8);
  g.topLeftCorner(6, 6) = g6;
  return g;
}

// Swaps walker species q_a <-> q_b on one site, spin untouched.
Eigen::MatrixXcd species_swap(int q_a, int q_b) {
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Identity(8, 8);
  for (int s = 0; s < 2; ++s) {
    const int i = 2 * q_a + s, j = 2 * q_b + s;
    g(i, i) = g(j, j) = 0.0;
    g(i, j) = g(j, i) = 1.0;
  }
  return g;
}

void step_open(MpsState& m, const WalkParams& p) {
  if (!m.tags_valid) rebuild_tags(m);
  const int n = m.n_sites();
  m.window_lo = std::max(0, m.window_lo - 1);
  m.window_hi = std::min(n - 1, m.window_hi + 1);
  const int lo = m.window_lo, hi = m.window_hi;

  const Eigen::MatrixXcd onsite = onsite_step_gate(p.theta, p.phi);
  for (int s = lo; s <= hi; ++s) apply_onsite(m, s, onsite);

  canonicalize_center(m, lo);
  if (lo == 0 && walker_weight(m, 0, 2, 2) > kEdgeTol)
    throw EdgeOverflow("coin-1 amplitude at the left edge");
  for (int b = lo; b < hi; ++b) hop_bond_open(m, b, true, true);

  if (hi == n - 1 && walker_weight(m, n - 1, 1, 1) > kEdgeTol)
    throw EdgeOverflow("coin-0 amplitude at the right edge");
  for (int b = hi - 1; b >= lo; --b) hop_bond_open(m, b, false, false);

  recanonicalize(m, lo, hi);
}

void step_periodic(MpsState& m, const WalkParams& p) {
  m.tags_valid = false;  // conveyor sweeps run on the generic dense path
  const int n = m.n_sites();
  pad_to_marked(m);
  const Eigen::MatrixXcd onsite = marked_onsite(onsite_step_gate(p.theta, p.phi));
  for (int s = 0; s < n; ++s) apply_onsite(m, s, onsite);

  canonicalize_center(m, 0);
  apply_onsite(m, 0, species_swap(2, 3));
  const auto left_swaps = hop_left_swaps(true);
  for (int b = 0; b < n - 1; ++b) hop_bond(m, b, left_swaps, true);
  apply_onsite(m, n - 1, species_swap(2, 3));

  apply_onsite(m, n - 1, species_swap(1, 3));
  const auto right_swaps = hop_right_swaps(true);
  for (int b = n - 2; b >= 0; --b) hop_bond(m, b, right_swaps, false);
  apply_onsite(m, 0, species_swap(1, 3));

  recanonicalize(m, 0, n - 1);
  unpad_marked(m);
}

}  // namespace

int MpsState::max_bond_dim() const {
  int d = 1;
  for (const auto& t : a) d = std::max(d, static_cast<int>(t.rows()));
  return d;
}

MpsState mps_init(const WalkParams& p, const MpsOptions& opt) {
  validate(p);
  if (opt.trunc_tol <= 0.0) throw ValidationError("truncation tolerance must be positive");
  if (opt.max_bond < 1) throw ValidationError("max_bond must be at least 1");

  MpsState m;
  m.opt = opt;
  m.boundary = p.boundary;
  m.site_offset = p.boundary == Boundary::open ? -(p.n_sites - 1) / 2 : 0;
  m.a.resize(p.n_sites);
  for (int i = 0; i < p.n_sites; ++i) {
    const int s = p.spin_init.empty() ? 0 : p.spin_init[static_cast<std::size_t>(i)];
    m.a[i] = Eigen::MatrixXcd::Zero(1, 6);
    m.a[i](0, s) = 1.0;
  }
  const int c0 = m.col_of(0);
  const int s0 = p.spin_init.empty() ? 0 : p.spin_init[static_cast<std::size_t>(c0)];
  m.a[c0].setZero();
  m.a[c0](0, 2 + s0) = p.coin_init(0);
  m.a[c0](0, 4 + s0) = p.coin_init(1);
  m.center = c0;
  if (p.boundary == Boundary::open) {
    m.window_lo = m.window_hi = c0;
  } else {
    m.window_lo = 0;
    m.window_hi = p.n_sites - 1;
  }
  m.bond_sigma.assign(static_cast<std::size_t>(p.n_sites - 1), Eigen::VectorXd::Ones(1));
  m.bond_tag.resize(static_cast<std::size_t>(p.n_sites) + 1);
  for (int k = 0; k <= p.n_sites; ++k)
    m.bond_tag[static_cast<std::size_t>(k)] = Eigen::VectorXi::Constant(1, k <= c0 ? 0 : 1);
  m.tags_valid = true;
  return m;
}

void apply_onsite(MpsState& m, int site, const Eigen::MatrixXcd& gate) {
  if (site < 0 || site >= m.n_sites()) throw ValidationError("site out of range");
  if (gate.rows() != m.phys || gate.cols() != m.phys)
    throw ValidationError("on-site gate does not match the local dimension");
  const int dr = right_dim(m, site);
  const Eigen::MatrixXcd& a = m.a[site];
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(a.rows(), a.cols());
  for (int q = 0; q < m.phys; ++q)
    for (int q2 = 0; q2 < m.phys; ++q2) {
      const cplx g = gate(q, q2);
      if (g == cplx(0.0, 0.0)) continue;
      if (occ(q) != occ(q2)) m.tags_valid = false;  // gate changes site occupancy
      out.middleCols(q * dr, dr) += g * a.middleCols(q2 * dr, dr);
    }
  m.a[site] = std::move(out);
}

void apply_bond_gate(MpsState& m, int bond, const Eigen::MatrixXcd& gate, bool move_right) {
  if (bond < 0 || bond + 1 >= m.n_sites()) throw ValidationError("bond out of range");
  if (m.center != bond && m.center != bond + 1)
    throw CenterMisplaced("orthogonality center is not on the bond");
  const int p = m.phys;
  if (gate.rows() != p * p || gate.cols() != p * p)
    throw ValidationError("bond gate does not match the local dimension");
  const int dl = static_cast<int>(m.a[bond].rows());
  const int dr = right_dim(m, bond + 1);
  Eigen::MatrixXcd theta = build_theta(m, bond);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(theta.rows(), theta.cols());
  for (int ql = 0; ql < p; ++ql)
    for (int qr = 0; qr < p; ++qr)
      for (int ql2 = 0; ql2 < p; ++ql2)
        for (int qr2 = 0; qr2 < p; ++qr2) {
          const cplx g = gate(ql * p + qr, ql2 * p + qr2);
          if (g != cplx(0.0, 0.0))
            out.block(ql * dl, qr * dr, dl, dr) += g * theta.block(ql2 * dl, qr2 * dr, dl, dr);
        }
  m.tags_valid = false;  // generic split does not track walker sectors
  write_back(m, bond, split_truncate(m, out), move_right);
}

void canonicalize_center(MpsState& m, int site) {
  if (site < 0 || site >= m.n_sites()) throw ValidationError("site out of range");
  while (m.center < site) move_center_right(m);
  while (m.center > site) move_center_left(m);
}

void mps_step(MpsState& m, const WalkParams& p) {
  if (m.boundary != p.boundary) throw ValidationError("boundary mismatch between state and params");
  if (m.boundary == Boundary::open)
    step_open(m, p);
  else
    step_periodic(m, p);
}

void mps_evolve(MpsState& m, const WalkParams& p, int t, const std::vector<int>& snapshot_times,
                const std::function<void(int, MpsState&)>& observe) {
  for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
    if (snapshot_times[i] < 0 || snapshot_times[i] > t)
      throw ValidationError("snapshot time outside the evolution range");
    if (i > 0 && snapshot_times[i] <= snapshot_times[i - 1])
      throw ValidationError("snapshot times must be strictly ascending");
  }
  std::size_t next = 0;
  if (next < snapshot_times.size() && snapshot_times[next] == 0) {
    observe(0, m);
    ++next;
  }
  for (int step = 1; step <= t; ++step) {
    mps_step(m, p);
    if (next < snapshot_times.size() && snapshot_times[next] == step) {
      if (std::abs(m.norm_sq() - 1.0) > 1e-8)
        throw ValidationError("state norm drifted beyond tolerance");
      observe(step, m);
      ++next;
    }
  }
}

double bond_entropy(MpsState& m, int bond) {
  if (bond < 0 || bond + 1 >= m.n_sites()) throw ValidationError("bond out of range");
  canonicalize_center(m, bond);
  return entropy_bits(singular_values(to_left(m.a[bond], m.phys)));
}

Eigen::VectorXd bond_entropy_profile(const MpsState& m) {
  Eigen::VectorXd s(m.n_sites() - 1);
  for (int b = 0; b < s.size(); ++b) s(b) = entropy_bits(m.bond_sigma[static_cast<std::size_t>(b)]);
  return s;
}

double local_expectation(MpsState& m, int site_col, SpinAxis axis) {
  if (site_col < 0 || site_col >= m.n_sites()) throw ValidationError("site out of range");
  canonicalize_center(m, site_col);
  const int dr = right_dim(m, site_col);
  const Eigen::MatrixXcd& a = m.a[site_col];
  auto block = [&](int p) { return a.middleCols(p * dr, dr); };
  cplx e = 0.0;
  for (int q = 0; q < 3; ++q) {
    const int d = 2 * q, u = 2 * q + 1;
    switch (axis) {
      case SpinAxis::z:
        e += block(d).squaredNorm() - block(u).squaredNorm();
        break;
      case SpinAxis::x:
        e += 2.0 * (block(d).conjugate().cwiseProduct(block(u))).sum().real();
        break;
      case SpinAxis::y:
        e += 2.0 * (block(d).conjugate().cwiseProduct(block(u))).sum().imag();
        break;
    }
  }
  return e.real();
}

ProbabilityDistribution walker_distribution_mps(MpsState& m) {
  const int n = m.n_sites();
  ProbabilityDistribution d;
  d.site_offset = m.site_offset;
  d.p = Eigen::VectorXd::Zero(n);
  for (int s = 0; s < n; ++s) {
    canonicalize_center(m, s);
    d.p(s) = walker_weight(m, s, 1, 2);
  }
  return d;
}

void apply_field(MpsState& m, double phi_prime) {
  const Eigen::MatrixXcd g = onsite_field_gate(phi_prime);
  for (int s = 0; s < m.n_sites(); ++s) apply_onsite(m, s, g);
}

ExactState mps_reconstruct_dense(const MpsState& m) {
  const int n = m.n_sites();
  if (n > 14) throw ValidationError("dense reconstruction capped at 14 sites");
  ExactState st;
  st.n_sites = n;
  st.site_offset = m.site_offset;
  st.boundary = m.boundary;
  st.amp = Eigen::VectorXcd::Zero(std::int64_t{2} * n << n);

  // Vacuum-product prefixes and suffixes over the spin bits.
  std::vector<std::vector<Eigen::RowVectorXcd>> pre(static_cast<std::size_t>(n) + 1);
  pre[0] = {Eigen::RowVectorXcd::Ones(1)};
  for (int i = 0; i < n; ++i) {
    const int dr = right_dim(m, i);
    pre[i + 1].resize(std::size_t{1} << (i + 1));
    for (std::uint64_t z = 0; z < (std::uint64_t{1} << i); ++z)
      for (int s = 0; s < 2; ++s)
        pre[i + 1][z | (static_cast<std::uint64_t>(s) << i)] =
            pre[i][z] * m.a[i].middleCols(s * dr, dr);
  }
  std::vector<std::vector<Eigen::VectorXcd>> suf(static_cast<std::size_t>(n) + 1);
  suf[n] = {Eigen::VectorXcd::Ones(1)};
  for (int i = n - 1; i >= 0; --i) {
    const int dr = right_dim(m, i);
    suf[i].resize(std::size_t{1} << (n - i));
    for (std::uint64_t u = 0; u < (std::uint64_t{1} << (n - i - 1)); ++u)
      for (int s = 0; s < 2; ++s)
        suf[i][(u << 1) | static_cast<std::uint64_t>(s)] =
            m.a[i].middleCols(s * dr, dr) * suf[i + 1][u];
  }

  for (int pos = 0; pos < n; ++pos) {
    const int dr = right_dim(m, pos);
    const std::uint64_t lo_mask = (std::uint64_t{1} << pos) - 1;
    for (int c = 0; c < 2; ++c)
      for (int s = 0; s < 2; ++s) {
        const Eigen::MatrixXcd w = m.a[pos].middleCols((2 * (1 + c) + s) * dr, dr);
        for (std::uint64_t zl = 0; zl <= lo_mask; ++zl) {
          const Eigen::RowVectorXcd row = pre[pos][zl] * w;
          for (std::uint64_t zr = 0; zr < (std::uint64_t{1} << (n - pos - 1)); ++zr) {
            const std::uint64_t z =
                zl | (static_cast<std::uint64_t>(s) << pos) | (zr << (pos + 1));
            st.amp(static_cast<std::int64_t>(st.index(c, pos, z))) =
                (row * suf[pos + 1][zr]).value();
          }
        }
      }
  }
  return st;
}

}  // namespace spinwalk
