#include "spinwalk/gates.hpp"

#include <array>
#include <complex>

#include "spinwalk/walk_core.hpp"

namespace spinwalk {

namespace {

Eigen::Matrix2cd x_rotation(double angle) {
  Eigen::Matrix2cd r;
  const cplx ms(0.0, -std::sin(angle));
  r << std::cos(angle), ms, ms, std::cos(angle);
  return r;
}

// Permutation on walker pairs (q_left, q_right), identity elsewhere and on
// both spins.
Eigen::MatrixXcd walker_pair_swap(int qa_l, int qa_r, int qb_l, int qb_r) {
  auto pair_of = [](int ql, int qr) { return ql * 3 + qr; };
  std::array<int, 9> perm;
  for (int i = 0; i < 9; ++i) perm[i] = i;
  perm[pair_of(qa_l, qa_r)] = pair_of(qb_l, qb_r);
  perm[pair_of(qb_l, qb_r)] = pair_of(qa_l, qa_r);

  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(36, 36);
  for (int ql = 0; ql < 3; ++ql)
    for (int qr = 0; qr < 3; ++qr) {
      const int out = perm[pair_of(ql, qr)];
      const int ql2 = out / 3, qr2 = out % 3;
      for (int sl = 0; sl < 2; ++sl)
        for (int sr = 0; sr < 2; ++sr)
          g(6 * (2 * ql2 + sl) + 2 * qr2 + sr, 6 * (2 * ql + sl) + 2 * qr + sr) = 1.0;
    }
  return g;
}

}  // namespace

Eigen::MatrixXcd onsite_coin_gate(double theta) {
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(6, 6);
  g(0, 0) = g(1, 1) = 1.0;
  const Eigen::Matrix2cd c = coin_matrix(theta);
  for (int q = 0; q < 2; ++q)
    for (int q2 = 0; q2 < 2; ++q2)
      for (int s = 0; s < 2; ++s) g(2 * (1 + q) + s, 2 * (1 + q2) + s) = c(q, q2);
  return g;
}

Eigen::MatrixXcd onsite_interaction_gate(double phi) {
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(6, 6);
  g(0, 0) = g(1, 1) = 1.0;
  const Eigen::Matrix2cd r = x_rotation(phi);
  for (int q = 1; q < 3; ++q)
    for (int s = 0; s < 2; ++s)
      for (int s2 = 0; s2 < 2; ++s2) g(2 * q + s, 2 * q + s2) = r(s, s2);
  return g;
}

Eigen::MatrixXcd onsite_step_gate(double theta, double phi) {
  return onsite_coin_gate(theta) * onsite_interaction_gate(phi);
}

Eigen::MatrixXcd onsite_field_gate(double phi_prime) {
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(6, 6);
  const cplx down = std::exp(cplx(0.0, -phi_prime));
  const cplx up = std::exp(cplx(0.0, phi_prime));
  for (int q = 0; q < 3; ++q) {
    g(2 * q, 2 * q) = down;
    g(2 * q + 1, 2 * q + 1) = up;
  }
  return g;
}

Eigen::MatrixXcd hop_left_gate() { return walker_pair_swap(0, 2, 2, 0); }

Eigen::MatrixXcd hop_right_gate() { return walker_pair_swap(1, 0, 0, 1); }

}  // namespace spinwalk
