#pragma once

#include <Eigen/Dense>

namespace spinwalk {

// Economy-size SVD m = u * diag(s) * vh with s descending.
struct Svd {
  Eigen::MatrixXcd u;   // rows(m) x k
  Eigen::VectorXd s;    // k = min(rows, cols)
  Eigen::MatrixXcd vh;  // k x cols(m)
};

Svd svd_economy(const Eigen::MatrixXcd& m);

// Thin QR: m = q * r, q rows(m) x k orthonormal columns, r k x cols(m) upper.
struct Qr {
  Eigen::MatrixXcd q;
  Eigen::MatrixXcd r;
};

Qr qr_thin(const Eigen::MatrixXcd& m);

// Thin LQ: m = l * q, l rows(m) x k lower, q k x cols(m) orthonormal rows.
struct Lq {
  Eigen::MatrixXcd l;
  Eigen::MatrixXcd q;
};

Lq lq_thin(const Eigen::MatrixXcd& m);

// Singular values only (descending); much faster for entropy evaluation.
Eigen::VectorXd singular_values(const Eigen::MatrixXcd& m);

// Von Neumann entropy -sum sigma^2 log2 sigma^2 of a Schmidt vector.
// Assumes sum sigma^2 ~ 1; tiny values are skipped, not clamped.
double entropy_bits(const Eigen::VectorXd& sigma);

}  // namespace spinwalk
