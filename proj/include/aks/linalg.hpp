#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace aks {

using cplx = std::complex<double>;
using Mat2c = Eigen::Matrix2cd;

inline cplx det2(const Mat2c& m) { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); }

inline double frob(const Mat2c& m) { return m.norm(); }

// Principal square root for scalars near 1 (used to renormalize determinants).
inline cplx principal_sqrt(cplx z) { return std::sqrt(z); }

inline bool is_special_unitary(const Mat2c& m, double tol = 1e-10) {
  Mat2c r = m.adjoint() * m - Mat2c::Identity();
  return r.norm() <= tol && std::abs(det2(m) - 1.0) <= tol;
}

// B = upper triangular, real positive diagonal, det 1.
inline bool is_b_group(const Mat2c& m, double tol = 1e-10) {
  if (std::abs(m(1, 0)) > tol) return false;
  if (std::abs(m(0, 0).imag()) > tol || std::abs(m(1, 1).imag()) > tol) return false;
  if (m(0, 0).real() <= 0.0 || m(1, 1).real() <= 0.0) return false;
  return std::abs(det2(m) - 1.0) <= tol;
}

// Nearest special-unitary matrix: polar factor of m, then determinant phase removed.
inline Mat2c polar_su2(const Mat2c& m) {
  Eigen::SelfAdjointEigenSolver<Mat2c> es(m.adjoint() * m);
  if (es.info() != Eigen::Success) throw std::runtime_error("polar_su2: eigensolver failed");
  Eigen::Vector2d ev = es.eigenvalues();
  if (ev(0) <= 0.0) throw std::runtime_error("polar_su2: singular input");
  Mat2c pinv_half = es.eigenvectors() *
                    Eigen::Vector2cd(1.0 / std::sqrt(ev(0)), 1.0 / std::sqrt(ev(1))).asDiagonal() *
                    es.eigenvectors().adjoint();
  Mat2c u = m * pinv_half;
  u /= principal_sqrt(det2(u));
  return u;
}

// Snap a near-B matrix back onto B: kill the lower-left entry, make the
// diagonal real positive with unit determinant, keep the upper-right entry.
inline Mat2c b_normalize(const Mat2c& m) {
  double a = m(0, 0).real();
  if (a <= 0.0) throw std::runtime_error("b_normalize: nonpositive leading diagonal");
  Mat2c r = Mat2c::Zero();
  r(0, 0) = a;
  r(0, 1) = m(0, 1);
  r(1, 1) = 1.0 / a;
  return r;
}

// Unit-determinant renormalization for a drifting SL(2,C) matrix.
inline Mat2c det_normalize(const Mat2c& m) {
  cplx d = det2(m);
  if (std::abs(d) < 1e-300) throw std::runtime_error("det_normalize: singular matrix");
  return m / principal_sqrt(d);
}

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf);
}

}  // namespace aks
