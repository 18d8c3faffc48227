#pragma once

#include <cmath>

#include "lie_algebra.hpp"
#include "linalg.hpp"

namespace aks {

// Basis indices for sl(2,C) viewed as a 6-dimensional real Lie algebra,
// split as su(2) (+) b with b the traceless upper-triangular subalgebra
// with real diagonal.
enum Sl2cIndex { iX1 = 0, iX2 = 1, iX3 = 2, iE = 3, iIE = 4, iH = 5 };

struct Sl2cModel {
  std::array<Mat2c, 6> basis;
  AlgebraPtr alg;           // level-0 descriptor, integer structure constants
  BilinearForm form;        // k0(X,Y) = -Im tr(XY)
  Splitting split;          // plus = su(2), minus = b
  Eigen::MatrixXd sigma;    // inner-product index map on the basis
  Eigen::MatrixXd sigma_inv;
  Eigen::MatrixXd jmat;     // coefficient matrix of X -> iX
  Eigen::Matrix3d zeta;     // su(2) -> su(2)* piece of sigma
  Eigen::Matrix3d vartheta; // b -> b* piece of sigma

  Mat2c realize(const Eigen::VectorXd& a) const {
    Mat2c m = Mat2c::Zero();
    for (int i = 0; i < 6; ++i)
      if (a(i) != 0.0) m += a(i) * basis[i];
    return m;
  }
  Mat2c realize(const AlgebraElement& x) const {
    require_same(x.alg, alg, "Sl2cModel::realize");
    return realize(x.a);
  }

  // Coefficients of a traceless matrix in the basis above.
  Eigen::VectorXd to_coefficients(const Mat2c& m, double tol = 1e-10) const {
    if (std::abs(m(0, 0) + m(1, 1)) > tol * (1.0 + m.norm()))
      throw std::invalid_argument("to_coefficients: matrix is not traceless");
    Eigen::VectorXd a(6);
    const cplx al = m(0, 0), be = m(0, 1), ga = m(1, 0);
    a(iX1) = ga.imag();
    a(iX2) = -ga.real();
    a(iX3) = al.imag();
    a(iH) = al.real();
    a(iE) = be.real() - a(iX2);
    a(iIE) = be.imag() - a(iX1);
    return a;
  }
  AlgebraElement to_element(const Mat2c& m, double tol = 1e-10) const {
    return {alg, to_coefficients(m, tol)};
  }

  cplx kappa(const Mat2c& x, const Mat2c& y) const { return 4.0 * (x * y).trace(); }
  double k0(const Mat2c& x, const Mat2c& y) const { return -((x * y).trace()).imag(); }

  AlgebraElement j_multiply(const AlgebraElement& x) const {
    require_same(x.alg, alg, "j_multiply");
    return {alg, jmat * x.a};
  }
};

inline Sl2cModel build_sl2c() {
  const cplx I(0.0, 1.0);
  Sl2cModel md{};
  md.basis[iX1] << 0, I, I, 0;
  md.basis[iX2] << 0, 1, -1, 0;
  md.basis[iX3] << I, 0, 0, -I;
  md.basis[iE] << 0, 1, 0, 0;
  md.basis[iIE] << 0, I, 0, 0;
  md.basis[iH] << 1, 0, 0, -1;

  // usable before md.alg exists: reads only the fixed basis layout
  auto coeffs = [&md](const Mat2c& m) { return md.to_coefficients(m, 1e-9); };

  // Structure constants from the matrix realization; they are integers, and
  // the rounding residual is asserted tiny so any basis typo explodes here.
  std::vector<double> c(6 * 6 * 6, 0.0);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      Mat2c br = md.basis[i] * md.basis[j] - md.basis[j] * md.basis[i];
      Eigen::VectorXd v = coeffs(br);
      for (int k = 0; k < 6; ++k) {
        double r = std::round(v(k));
        if (std::abs(v(k) - r) > 1e-12)
          throw std::runtime_error("build_sl2c: non-integer structure constant");
        c[(static_cast<size_t>(i) * 6 + j) * 6 + k] = r;
      }
    }
  md.alg = make_algebra(0, {"X1", "X2", "X3", "E", "iE", "H"}, c);

  Eigen::MatrixXd K(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      double v = md.k0(md.basis[i], md.basis[j]);
      double r = std::round(v);
      if (std::abs(v - r) > 1e-12) throw std::runtime_error("build_sl2c: non-integer form entry");
      K(i, j) = r;
    }
  md.form = make_form(md.alg, K, true);
  md.split = make_splitting(md.alg, {iX1, iX2, iX3}, {iE, iIE, iH});

  Eigen::VectorXd sd(6);
  sd << -0.125, -0.125, -0.125, -8.0, -8.0, -32.0;
  md.sigma = sd.asDiagonal();
  md.sigma_inv = sd.cwiseInverse().asDiagonal();
  md.zeta = Eigen::Vector3d(-0.125, -0.125, -0.125).asDiagonal();
  md.vartheta = Eigen::Vector3d(-8.0, -8.0, -32.0).asDiagonal();

  md.jmat = Eigen::MatrixXd::Zero(6, 6);
  for (int k = 0; k < 6; ++k) {
    Eigen::VectorXd v = coeffs(I * md.basis[k]);
    for (int r = 0; r < 6; ++r) {
      double q = std::round(v(r));
      if (std::abs(v(r) - q) > 1e-12) throw std::runtime_error("build_sl2c: non-integer j entry");
      md.jmat(r, k) = q;
    }
  }
  return md;
}

}  // namespace aks
