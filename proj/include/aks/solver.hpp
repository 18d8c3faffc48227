#pragma once

// Solution by factorization: k(t) = Exp(t Theta0) with Theta0 = L(gamma(Gamma0)),
// k = h+ g-, and Gamma(t) = Ad_{g-(t)} Gamma0. The closed sl(2,C) expressions
// here are pinned references for the generic exp/factorize path.

#include <cmath>
#include <stdexcept>
#include <utility>

#include "aks/dynamics.hpp"

namespace aks {

struct AksData {
  int alevel = 0;
  AlgebraElement gamma0;
  AlgebraElement theta0;
};

inline AksData make_aks_data(const Tower& tw, const Hamiltonian& ham,
                             const AlgebraElement& gamma0) {
  require_same(gamma0.alg, tw.lv(ham.alevel).alg, "make_aks_data");
  return {ham.alevel, gamma0, omega_of_gamma(tw, ham, gamma0)};
}

// Samples the factorization solution on a uniform grid. The state rows extend
// the integrator layout by the minus factor: [h+ | Gamma | k | g-].
inline Trajectory solve_by_factorization(const Tower& tw, const Hamiltonian& ham,
                                         const AksData& data, double t0, double t1, int samples) {
  if (samples < 2) throw std::invalid_argument("solve_by_factorization: samples must be >= 2");
  if (t1 < t0) throw std::invalid_argument("solve_by_factorization: t1 < t0");
  if (ham.alevel != data.alevel)
    throw std::invalid_argument("solve_by_factorization: hamiltonian and data levels differ");
  const int L = data.alevel;
  const int gs = Tower::flat_size(L);
  const int d = tw.lv(L).alg->dim;

  Trajectory tr;
  tr.group_level = L;
  tr.coordinates = "omega_gamma";
  tr.columns = state_columns(tw, L, "Gamma");
  for (const auto& n : tw.group_col_names(L, "g")) tr.columns.push_back(n);

  for (int i = 0; i < samples; ++i) {
    double t = t0 + (t1 - t0) * i / (samples - 1);
    GroupElement k = tw.exp(data.theta0, t);
    auto [hp, gm] = tw.factorize(k);
    AlgebraElement gamma = tw.adjoint(gm, data.gamma0);
    Eigen::VectorXd y(3 * gs + d);
    y.head(gs) = tw.flatten(hp);
    y.segment(gs, d) = gamma.a;
    y.segment(gs + d, gs) = tw.flatten(k);
    y.tail(gs) = tw.flatten(gm);
    tr.times.push_back(t);
    tr.states.push_back(std::move(y));
  }
  return tr;
}

// Convenience entry for the tower hierarchy with the Killing-metric quadratic
// Hamiltonian, for which Omega = Gamma.
inline Trajectory tower_solve(const Tower& tw, int alevel, const AlgebraElement& gamma0,
                              double t0, double t1, int samples) {
  Hamiltonian ham = make_quadratic_km(tw, alevel);
  return solve_by_factorization(tw, ham, make_aks_data(tw, ham, gamma0), t0, t1, samples);
}

// Central-difference residuals of the factor velocities against
// h+^-1 h+' = Omega_+ and g-' g-^-1 = Omega_-, Omega = L(gamma(Gamma)).
struct FactorVelocityResidual {
  double plus = 0.0;
  double minus = 0.0;
};

inline FactorVelocityResidual factor_velocity_residual(const Tower& tw, const Hamiltonian& ham,
                                                       const AksData& data, double t,
                                                       double step = 1e-4) {
  const Tower::Level& L = tw.lv(data.alevel);
  auto factors = [&](double s) { return tw.factorize(tw.exp(data.theta0, s)); };
  auto [hp, gm] = factors(t);
  auto [hp_f, gm_f] = factors(t + step);
  auto [hp_b, gm_b] = factors(t - step);

  AlgebraElement gamma = tw.adjoint(gm, data.gamma0);
  AlgebraElement omega = omega_of_gamma(tw, ham, gamma);
  Eigen::VectorXd dp = (tw.flatten(hp_f) - tw.flatten(hp_b)) / (2.0 * step);
  Eigen::VectorXd dm = (tw.flatten(gm_f) - tw.flatten(gm_b)) / (2.0 * step);
  FactorVelocityResidual r;
  r.plus = (dp - tw.flatten_body_tangent(hp, project(L.split, omega, Side::plus)))
               .cwiseAbs()
               .maxCoeff();
  r.minus = (dm - tw.flatten_right_tangent(gm, project(L.split, omega, Side::minus)))
                .cwiseAbs()
                .maxCoeff();
  return r;
}

// ---------------------------------------------------------------------------
// Level-down reading of a level-m factorization sample: with g- = (g', Z') and
// Gamma0 = (G0', G0''), the nested variables at parameter R- are
//   Gamma~(t) = Ad_{g'} G0',
//   M(t)      = [Ad_{g'} Z' - R-, Gamma~(t)] + Ad_{g'} G0'',
// so that Gamma_m(t) = (Gamma~, [R-, Gamma~] + M) = Ad_{g-} Gamma0.

struct NestedSample {
  AlgebraElement gamma_t;
  AlgebraElement m_t;
};

inline NestedSample nested_projection(const Tower& tw, const GroupElement& g_minus,
                                      const AlgebraElement& gamma0,
                                      const AlgebraElement& r_minus) {
  if (g_minus.level < 1)
    throw std::invalid_argument("nested_projection: needs a level >= 1 group element");
  auto [g0p, g0pp] = tw.pair_split(gamma0);
  const GroupElement& g = *g_minus.base;
  AlgebraElement gt = tw.adjoint(g, g0p);
  AlgebraElement mt =
      bracket(tw.adjoint(g, g_minus.fiber) - r_minus, gt) + tw.adjoint(g, g0pp);
  return {gt, mt};
}

// ---------------------------------------------------------------------------
// Iterated cross products x x (x x ... (x x y)) with n factors of x.
//   n even: (-1)^{n/2+1} |x|^{n-2} [(x.y) x - |x|^2 y]
//   n odd:  (-1)^{(n-1)/2} |x|^{n-1} (x x y)

inline Eigen::Vector3d iterated_cross_direct(const Eigen::Vector3d& x, const Eigen::Vector3d& y,
                                             int n) {
  if (n < 1) throw std::invalid_argument("iterated_cross_direct: n must be >= 1");
  Eigen::Vector3d w = y;
  for (int k = 0; k < n; ++k) w = x.cross(w);
  return w;
}

inline Eigen::Vector3d iterated_cross_closed(const Eigen::Vector3d& x, const Eigen::Vector3d& y,
                                             int n) {
  if (n < 1) throw std::invalid_argument("iterated_cross_closed: n must be >= 1");
  if (n % 2 == 0) {
    double sign = (n / 2 + 1) % 2 == 0 ? 1.0 : -1.0;
    return sign * std::pow(x.norm(), n - 2) * (x.dot(y) * x - x.squaredNorm() * y);
  }
  double sign = ((n - 1) / 2) % 2 == 0 ? 1.0 : -1.0;
  return sign * std::pow(x.norm(), n - 1) * x.cross(y);
}

// ad_{X0+}^n Y0+ for a unit su(2) direction a and X0+ = a.X, Y0+ = y.X:
//   n even (n >= 2): (-1)^{n/2+1} 2^n [(a.y) X0+ - Y0+]
//   n odd:           (-1)^{(n-1)/2} 2^{n-1} [X0+, Y0+]

inline AlgebraElement ad_power_direct(const Tower& tw, const Eigen::Vector3d& a,
                                      const Eigen::Vector3d& y, int n) {
  if (n < 0) throw std::invalid_argument("ad_power_direct: n must be >= 0");
  AlgebraElement x = su2_element(tw, a), w = su2_element(tw, y);
  for (int k = 0; k < n; ++k) w = bracket(x, w);
  return w;
}

inline AlgebraElement ad_power_closed(const Tower& tw, const Eigen::Vector3d& a,
                                      const Eigen::Vector3d& y, int n) {
  if (n < 0) throw std::invalid_argument("ad_power_closed: n must be >= 0");
  if (std::abs(a.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("ad_power_closed: direction must be a unit vector");
  if (n == 0) return su2_element(tw, y);
  AlgebraElement x0 = su2_element(tw, a), y0 = su2_element(tw, y);
  if (n % 2 == 0) {
    double sign = (n / 2 + 1) % 2 == 0 ? 1.0 : -1.0;
    return sign * std::pow(2.0, n) * (a.dot(y) * x0 - y0);
  }
  double sign = ((n - 1) / 2) % 2 == 0 ? 1.0 : -1.0;
  return sign * std::pow(2.0, n - 1) * bracket(x0, y0);
}

// ---------------------------------------------------------------------------
// Closed level-1 factorization for Gamma0 = (X0+, Y0+) with a unit su(2)
// direction a: the flow base exp(i (t/2) X0+) splits as h0+ k0- with
//   D    = cosh t - a3 sinh t,
//   h0+  = D^{-1/2} [[ch - a3 sh, (a1 - i a2) sh], [-(a1 + i a2) sh, ch - a3 sh]]
//          (ch = cosh(t/2), sh = sinh(t/2)),
//   k0-  = [[sqrt(D), -(a1 - i a2) sinh t / sqrt(D)], [0, 1/sqrt(D)]],
// and the fiber of Exp(t Theta0) sums to
//   S(t) = (i/2)(t - sinh t)(a.y) X0+ + (i/2)(sinh t) Y0+
//          + (1/4)(cosh t - 1) [X0+, Y0+].
// The level-1 factors carry X1+ = P+ Ad_{k0-} S and X1- = A-(k0-) S.

struct Sl2cFactorization {
  GroupElement k1;
  GroupElement plus1;
  GroupElement minus1;
};

inline Sl2cFactorization sl2c_closed_form(const Tower& tw, const Eigen::Vector3d& a,
                                          const Eigen::Vector3d& y, double t) {
  if (std::abs(a.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("sl2c_closed_form: direction must be a unit vector");
  const Sl2cModel& md = tw.model();
  const double ch = std::cosh(t / 2), sh = std::sinh(t / 2);
  const double D = std::cosh(t) - a(2) * std::sinh(t);
  const double rD = std::sqrt(D);

  Mat2c h0p;
  h0p << cplx(ch - a(2) * sh, 0), cplx(a(0), -a(1)) * sh, -cplx(a(0), a(1)) * sh,
      cplx(ch - a(2) * sh, 0);
  h0p /= rD;
  Mat2c k0m;
  k0m << cplx(rD, 0), -cplx(a(0), -a(1)) * std::sinh(t) / rD, cplx(0, 0), cplx(1 / rD, 0);

  AlgebraElement x0 = su2_element(tw, a), y0 = su2_element(tw, y);
  AlgebraElement s = 0.5 * (t - std::sinh(t)) * a.dot(y) * md.j_multiply(x0) +
                     0.5 * std::sinh(t) * md.j_multiply(y0) +
                     0.25 * (std::cosh(t) - 1.0) * bracket(x0, y0);

  const Splitting& sp = tw.lv(0).split;
  AlgebraElement x1p = project(sp, adjoint_b_closed(k0m, s), Side::plus);
  AlgebraElement x1m = a_minus_closed(k0m, s);

  Sl2cFactorization out{tw.gpair(g0(exp_i_su2(md, a, t / 2)), s),
                        tw.gpair(g0(h0p), x1p), tw.gpair(g0(k0m), x1m)};
  return out;
}

}  // namespace aks
