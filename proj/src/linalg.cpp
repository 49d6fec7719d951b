#include "spinwalk/linalg.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include <lapacke.h>

namespace spinwalk {

namespace {

lapack_complex_double* lap(Eigen::MatrixXcd& m) {
  return reinterpret_cast<lapack_complex_double*>(m.data());
}

}  // namespace

Svd svd_economy(const Eigen::MatrixXcd& m) {
  const lapack_int rows = static_cast<lapack_int>(m.rows());
  const lapack_int cols = static_cast<lapack_int>(m.cols());
  const lapack_int k = std::min(rows, cols);
  Svd out;
  out.u.resize(rows, k);
  out.s.resize(k);
  out.vh.resize(k, cols);
  Eigen::MatrixXcd work = m;  // gesdd destroys its input
  lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'S', rows, cols, lap(work), rows,
                                   out.s.data(), lap(out.u), rows, lap(out.vh), k);
  if (info != 0) {
    // Divide-and-conquer occasionally fails to converge; QR-based fallback.
    work = m;
    Eigen::VectorXd superb(std::max<lapack_int>(1, k - 1));
    info = LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'S', 'S', rows, cols, lap(work), rows,
                          out.s.data(), lap(out.u), rows, lap(out.vh), k, superb.data());
    if (info != 0) throw std::runtime_error("SVD failed to converge");
  }
  return out;
}

Qr qr_thin(const Eigen::MatrixXcd& m) {
  const lapack_int rows = static_cast<lapack_int>(m.rows());
  const lapack_int cols = static_cast<lapack_int>(m.cols());
  const lapack_int k = std::min(rows, cols);
  Eigen::MatrixXcd work = m;
  Eigen::VectorXcd tau(k);
  lapack_int info = LAPACKE_zgeqrf(LAPACK_COL_MAJOR, rows, cols, lap(work), rows,
                                   reinterpret_cast<lapack_complex_double*>(tau.data()));
  if (info != 0) throw std::runtime_error("QR factorization failed");
  Qr out;
  out.r = Eigen::MatrixXcd::Zero(k, cols);
  for (lapack_int j = 0; j < cols; ++j) {
    const lapack_int top = std::min<lapack_int>(j + 1, k);
    out.r.col(j).head(top) = work.col(j).head(top);
  }
  info = LAPACKE_zungqr(LAPACK_COL_MAJOR, rows, k, k, lap(work), rows,
                        reinterpret_cast<lapack_complex_double*>(tau.data()));
  if (info != 0) throw std::runtime_error("QR factorization failed");
  out.q = work.leftCols(k);
  return out;
}

Lq lq_thin(const Eigen::MatrixXcd& m) {
  const lapack_int rows = static_cast<lapack_int>(m.rows());
  const lapack_int cols = static_cast<lapack_int>(m.cols());
  const lapack_int k = std::min(rows, cols);
  Eigen::MatrixXcd work = m;
  Eigen::VectorXcd tau(k);
  lapack_int info = LAPACKE_zgelqf(LAPACK_COL_MAJOR, rows, cols, lap(work), rows,
                                   reinterpret_cast<lapack_complex_double*>(tau.data()));
  if (info != 0) throw std::runtime_error("LQ factorization failed");
  Lq out;
  out.l = Eigen::MatrixXcd::Zero(rows, k);
  for (lapack_int j = 0; j < k; ++j) out.l.col(j).tail(rows - j) = work.col(j).tail(rows - j);
  info = LAPACKE_zunglq(LAPACK_COL_MAJOR, k, cols, k, lap(work), rows,
                        reinterpret_cast<lapack_complex_double*>(tau.data()));
  if (info != 0) throw std::runtime_error("LQ factorization failed");
  out.q = work.topRows(k);
  return out;
}

Eigen::VectorXd singular_values(const Eigen::MatrixXcd& m) {
  const lapack_int rows = static_cast<lapack_int>(m.rows());
  const lapack_int cols = static_cast<lapack_int>(m.cols());
  const lapack_int k = std::min(rows, cols);
  Eigen::VectorXd s(k);
  Eigen::MatrixXcd work = m;
  lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', rows, cols, lap(work), rows,
                                   s.data(), nullptr, rows, nullptr, 1);
  if (info != 0) {
    work = m;
    Eigen::VectorXd superb(std::max<lapack_int>(1, k - 1));
    info = LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'N', 'N', rows, cols, lap(work), rows,
                          s.data(), nullptr, rows, nullptr, 1, superb.data());
    if (info != 0) throw std::runtime_error("SVD failed to converge");
  }
  return s;
}

double entropy_bits(const Eigen::VectorXd& sigma) {
  double s = 0.0;
  for (int i = 0; i < sigma.size(); ++i) {
    const double w = sigma(i) * sigma(i);
    if (w > 1e-300) s -= w * std::log2(w);
  }
  return s;
}

}  // namespace spinwalk
