#pragma once

#include <Eigen/Dense>

#include "spinwalk/common.hpp"

namespace spinwalk {

// Local basis: combined index 2q+s with walker q in {0: vacuum, 1: coin 0,
// 2: coin 1} and spin s in {0,1}.  On-site gates are 6x6, bond gates 36x36
// with the left site's index major.

Eigen::MatrixXcd onsite_coin_gate(double theta);

// Rotates the spin by exp(-i*phi*X) only where the walker is present.
Eigen::MatrixXcd onsite_interaction_gate(double phi);

// Coin after interaction, merged into one gate.
Eigen::MatrixXcd onsite_step_gate(double theta, double phi);

// exp(-i*phi_prime*Z) on the spin, walker untouched.
Eigen::MatrixXcd onsite_field_gate(double phi_prime);

// Transport permutations.  hop_left moves a coin-1 walker one site left,
// hop_right moves a coin-0 walker one site right; spins stay put.
Eigen::MatrixXcd hop_left_gate();
Eigen::MatrixXcd hop_right_gate();

}  // namespace spinwalk
