#pragma once

#include <functional>
#include <optional>
#include <utility>

#include "hamiltonian.hpp"

namespace aks {

// A point of the phase space H_L x h_L: a group element of level L together
// with an algebra element of the same level.
struct PhasePoint {
  GroupElement h;
  AlgebraElement Z;
};

inline Eigen::VectorXd phase_flatten(const Tower& tw, const PhasePoint& p) {
  Eigen::VectorXd v(Tower::flat_size(p.h.level) + p.Z.a.size());
  v.head(Tower::flat_size(p.h.level)) = tw.flatten(p.h);
  v.tail(p.Z.a.size()) = p.Z.a;
  return v;
}

inline PhasePoint phase_unflatten(const Tower& tw, int level, const Eigen::VectorXd& v) {
  const int gs = Tower::flat_size(level);
  const int d = tw.lv(level).alg->dim;
  if (v.size() != gs + d) throw std::invalid_argument("phase_unflatten: size mismatch");
  return {tw.unflatten(level, v.head(gs)), element(tw.lv(level).alg, v.tail(d))};
}

// Differentials are carried in body form: the group slope dF is the dual
// vector with dF . xi = d/ds F(h Exp(s xi), Z), the fiber slope deltaF is the
// plain gradient in the Z coefficients.
struct Differential {
  Eigen::VectorXd dF;
  Eigen::VectorXd deltaF;
};

struct Observable {
  std::function<double(const PhasePoint&)> eval;
  std::function<Differential(const PhasePoint&)> differential;
  bool left_invariant = false;  // depends on the algebra slot alone, so dF = 0
};

inline Differential fd_differential(const Tower& tw, int alevel,
                                    const std::function<double(const PhasePoint&)>& eval,
                                    const PhasePoint& p, double step = 1e-6) {
  const int d = tw.lv(alevel).alg->dim;
  Differential out{Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d)};
  for (int i = 0; i < d; ++i) {
    AlgebraElement ei = basis_element(tw.lv(alevel).alg, i);
    PhasePoint pp{tw.mul(p.h, tw.exp(ei, step)), p.Z};
    PhasePoint pm{tw.mul(p.h, tw.exp(ei, -step)), p.Z};
    out.dF(i) = (eval(pp) - eval(pm)) / (2.0 * step);
    PhasePoint zp{p.h, p.Z};
    zp.Z.a(i) += step;
    PhasePoint zm{p.h, p.Z};
    zm.Z.a(i) -= step;
    out.deltaF(i) = (eval(zp) - eval(zm)) / (2.0 * step);
  }
  return out;
}

inline Observable make_observable(const Tower& tw, int alevel,
                                  std::function<double(const PhasePoint&)> eval) {
  const Tower* tp = &tw;
  Observable obs;
  obs.eval = eval;
  obs.differential = [tp, alevel, eval](const PhasePoint& p) {
    return fd_differential(*tp, alevel, eval, p);
  };
  return obs;
}

// Attach an exact differential after validating it against finite differences
// at the supplied sample points.
inline Observable register_observable(const Tower& tw, int alevel,
                                      std::function<double(const PhasePoint&)> eval,
                                      std::function<Differential(const PhasePoint&)> differential,
                                      const std::vector<PhasePoint>& checks, double tol = 1e-5) {
  for (const PhasePoint& p : checks) {
    Differential ex = differential(p);
    Differential fd = fd_differential(tw, alevel, eval, p);
    double r = std::max((ex.dF - fd.dF).cwiseAbs().maxCoeff(),
                        (ex.deltaF - fd.deltaF).cwiseAbs().maxCoeff());
    if (r > tol)
      throw std::invalid_argument("register_observable: differential disagrees with finite differences");
  }
  return {std::move(eval), std::move(differential)};
}

// F(h, Z) = (Z, u)_sigma, the left-invariant linear function of the fiber slot
// with exact differential (0, sigma u).
inline Observable linear_z_observable(const Tower& tw, int alevel, const AlgebraElement& u) {
  const Tower::Level* L = &tw.lv(alevel);
  require_same(u.alg, L->alg, "linear_z_observable");
  Observable obs;
  obs.left_invariant = true;
  obs.eval = [L, u](const PhasePoint& p) { return (L->sigma * p.Z.a).dot(u.a); };
  obs.differential = [L, u](const PhasePoint&) {
    return Differential{Eigen::VectorXd::Zero(L->alg->dim), L->sigma * u.a};
  };
  return obs;
}

// ---------------------------------------------------------------------------
// Canonical bracket on H_L x h_L:
// {F,G} = <dF, sigma^-1 deltaG> - <dG, sigma^-1 deltaF> - <sigma Z, [sigma^-1 deltaF, sigma^-1 deltaG]>

inline double canonical_poisson(const Tower& tw, int alevel, const Observable& F,
                                const Observable& G, const PhasePoint& p) {
  const Tower::Level& L = tw.lv(alevel);
  Differential f = F.differential(p), g = G.differential(p);
  AlgebraElement uF = element(L.alg, L.sigma_inv * f.deltaF);
  AlgebraElement uG = element(L.alg, L.sigma_inv * g.deltaF);
  return f.dF.dot(uG.a) - g.dF.dot(uF.a) - (L.sigma * p.Z.a).dot(bracket(uF, uG).a);
}

// V_H = (h sigma^-1 deltaH, sigma^-1(ad*_{sigma^-1 deltaH} sigma Z - dH));
// returned as (body velocity, Zdot).
inline std::pair<AlgebraElement, AlgebraElement> canonical_field(const Tower& tw, int alevel,
                                                                 const Observable& H,
                                                                 const PhasePoint& p) {
  const Tower::Level& L = tw.lv(alevel);
  Differential h = H.differential(p);
  AlgebraElement u = element(L.alg, L.sigma_inv * h.deltaF);
  CoalgebraElement sz{L.alg, L.sigma * p.Z.a};
  Eigen::VectorXd zdot = L.sigma_inv * (ad_star(u, sz).a - h.dF);
  return {u, element(L.alg, std::move(zdot))};
}

// ---------------------------------------------------------------------------
// Fibers of H_L x h_L -> H_L^- x h_L^- and the Dirac bracket on them

struct FiberBasePoint {
  GroupElement h_minus;
  AlgebraElement z_minus;
  bool character = false;  // sigma(z_minus) kills [h^-, h^-]
};

inline bool is_minus_character(const Tower& tw, int alevel, const AlgebraElement& z_minus,
                               double tol = 1e-10) {
  const Tower::Level& L = tw.lv(alevel);
  Eigen::VectorXd sz = L.sigma * z_minus.a;
  double worst = 0.0;
  for (int i : L.split.minus_idx)
    for (int j : L.split.minus_idx)
      worst = std::max(worst, std::abs(sz.dot(L.alg->ad[i].col(j))));
  return worst <= tol * (1.0 + sz.cwiseAbs().maxCoeff());
}

inline FiberBasePoint make_base_point(const Tower& tw, const GroupElement& h_minus,
                                      const AlgebraElement& z_minus) {
  int alevel = h_minus.level;
  require_same(z_minus.alg, tw.lv(alevel).alg, "make_base_point");
  if (!tw.in_minus_group(h_minus))
    throw std::invalid_argument("make_base_point: group part is not in the minus subgroup");
  if (!in_side(tw.lv(alevel).split, z_minus, Side::minus))
    throw std::invalid_argument("make_base_point: algebra part is not in the minus subalgebra");
  return {h_minus, z_minus, is_minus_character(tw, alevel, z_minus)};
}

inline bool on_fiber(const Tower& tw, const PhasePoint& p, const FiberBasePoint& base,
                     double tol = 1e-8) {
  auto [hp, hm] = tw.factorize(p.h);
  if ((tw.flatten(hm) - tw.flatten(base.h_minus)).cwiseAbs().maxCoeff() > tol) return false;
  AlgebraElement zm = project(tw.lv(p.h.level).split, p.Z, Side::minus);
  return (zm.a - base.z_minus.a).cwiseAbs().maxCoeff() <= tol;
}

// Dirac bracket of the fiber through p. When `base` is passed the point is
// checked to lie on that fiber; otherwise the minus factor of p.h is used.
inline double dirac_bracket(const Tower& tw, int alevel, const Observable& F, const Observable& G,
                            const PhasePoint& p, const FiberBasePoint* base = nullptr) {
  const Tower::Level& L = tw.lv(alevel);
  if (base && !on_fiber(tw, p, *base))
    throw std::invalid_argument("dirac_bracket: point is off the fiber");
  GroupElement hm = base ? base->h_minus : tw.factorize(p.h).second;
  Differential f = F.differential(p), g = G.differential(p);
  AlgebraElement uF = tw.projector_A(hm, element(L.alg, L.sigma_inv * f.deltaF), Side::plus);
  AlgebraElement uG = tw.projector_A(hm, element(L.alg, L.sigma_inv * g.deltaF), Side::plus);
  return f.dF.dot(uG.a) - g.dF.dot(uF.a) - (L.sigma * p.Z.a).dot(bracket(uF, uG).a);
}

// Hamiltonian vector field of the Dirac bracket:
//   h^-1 hdot = A_+(h^-) sigma^-1 deltaH
//   Zdot = sigma^-1 gamma A_-(h^-) ([gamma^-1 sigma Z, h^-1 hdot] - gamma^-1 dH)
inline std::pair<AlgebraElement, AlgebraElement> dirac_field(const Tower& tw, int alevel,
                                                             const Observable& H,
                                                             const PhasePoint& p,
                                                             const FiberBasePoint* base = nullptr) {
  const Tower::Level& L = tw.lv(alevel);
  if (base && !on_fiber(tw, p, *base))
    throw std::invalid_argument("dirac_field: point is off the fiber");
  GroupElement hm = base ? base->h_minus : tw.factorize(p.h).second;
  Differential h = H.differential(p);
  AlgebraElement u = tw.projector_A(hm, element(L.alg, L.sigma_inv * h.deltaF), Side::plus);
  AlgebraElement gz = element(L.alg, L.form.m_inv * (L.sigma * p.Z.a));
  AlgebraElement w = bracket(gz, u) - element(L.alg, L.form.m_inv * h.dF);
  AlgebraElement am = tw.projector_A(hm, w, Side::minus);
  Eigen::VectorXd zdot = L.sigma_inv * (L.form.m * am.a);
  return {u, element(L.alg, std::move(zdot))};
}

// Lie-Poisson value at the base fiber (e, 0): -<sigma Z, [Pi+ sigma^-1 dF, Pi+ sigma^-1 dG]>.
inline double lie_poisson_value(const Tower& tw, int alevel, const AlgebraElement& z,
                                const Eigen::VectorXd& deltaF, const Eigen::VectorXd& deltaG) {
  const Tower::Level& L = tw.lv(alevel);
  AlgebraElement uF = project(L.split, element(L.alg, L.sigma_inv * deltaF), Side::plus);
  AlgebraElement uG = project(L.split, element(L.alg, L.sigma_inv * deltaG), Side::plus);
  return -(L.sigma * z.a).dot(bracket(uF, uG).a);
}

// ---------------------------------------------------------------------------
// The magnetic picture of the level-0 Dirac bracket on su(2)* coordinates

inline Eigen::Matrix3d magnetic_jacobian(const Mat2c& h_minus) {
  double a, b, c;
  b_entries(h_minus, a, b, c);
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  m(0, 2) = b / a;
  m(1, 2) = -c / a;
  m(2, 0) = b / a;
  m(2, 1) = -c / a;
  m(2, 2) = -((b * b + c * c) / (a * a) + 1.0 / (a * a * a * a) - 1.0);
  return m;
}

inline Eigen::Vector3d magnetic_field(const Mat2c& h_minus, const Eigen::Vector3d& z) {
  return magnetic_jacobian(h_minus) * z;
}

inline double monopole_density(const Mat2c& h_minus) {
  double a, b, c;
  b_entries(h_minus, a, b, c);
  // written as the jacobian corner entry so that div B = rho holds bitwise
  return -((b * b + c * c) / (a * a) + 1.0 / (a * a * a * a) - 1.0);
}

// Same density expressed through the group element: tr(h_minus H h_minus^*) / a^2.
inline double monopole_density_trace(const Mat2c& h_minus) {
  double a, b, c;
  b_entries(h_minus, a, b, c);
  Mat2c H;
  H << 1, 0, 0, -1;
  return ((h_minus * H * h_minus.adjoint()).trace()).real() / (a * a);
}

// Fast path for the level-0 Dirac bracket of functions of the su(2) fiber
// coordinates: -16 eps_ijk dF_i dG_j (z_k - B_k).
inline double dirac_fast_sl2c(const Mat2c& h_minus, const Eigen::Vector3d& z,
                              const Eigen::Vector3d& dF, const Eigen::Vector3d& dG) {
  Eigen::Vector3d w = z - magnetic_field(h_minus, z);
  return -16.0 * dF.cross(dG).dot(w);
}

// ---------------------------------------------------------------------------
// Momentum maps

// Phi_B(h, Z) = gamma(Ad_h gamma^-1 sigma Z) = Ad*_{h^-1} sigma Z.
inline CoalgebraElement phi_B(const Tower& tw, int alevel, const PhasePoint& p) {
  const Tower::Level& L = tw.lv(alevel);
  AlgebraElement w = tw.adjoint(p.h, element(L.alg, L.form.m_inv * (L.sigma * p.Z.a)));
  return {L.alg, L.form.m * w.a};
}

// phi_X(h, Z) = (Z, Ad_{h^-1} X)_sigma.
inline double phi_X(const Tower& tw, int alevel, const PhasePoint& p, const AlgebraElement& x) {
  const Tower::Level& L = tw.lv(alevel);
  return (L.sigma * p.Z.a).dot(tw.adjoint(tw.inverse(p.h), x).a);
}

// Exact differential of phi_X: dphi = gamma([gamma^-1 sigma Z, Ad_{h^-1} X]),
// delta phi = sigma(Ad_{h^-1} X).
inline Observable phi_X_observable(const Tower& tw, int alevel, const AlgebraElement& x) {
  const Tower* tp = &tw;
  Observable obs;
  obs.eval = [tp, alevel, x](const PhasePoint& p) { return phi_X(*tp, alevel, p, x); };
  obs.differential = [tp, alevel, x](const PhasePoint& p) {
    const Tower::Level& L = tp->lv(alevel);
    AlgebraElement w = tp->adjoint(tp->inverse(p.h), x);
    AlgebraElement gz = element(L.alg, L.form.m_inv * (L.sigma * p.Z.a));
    return Differential{L.form.m * bracket(gz, w).a, L.sigma * w.a};
  };
  return obs;
}

// Theta(h_plus, Z_plus) = gamma(Pi+ Ad_{h_plus^-1} gamma^-1 sigma Z_plus), a
// dual vector supported on the minus factor's dual coordinates.
inline CoalgebraElement theta_plus(const Tower& tw, int alevel, const PhasePoint& p) {
  const Tower::Level& L = tw.lv(alevel);
  AlgebraElement w = tw.adjoint(tw.inverse(p.h), element(L.alg, L.form.m_inv * (L.sigma * p.Z.a)));
  return {L.alg, L.form.m * project(L.split, w, Side::plus).a};
}

// Correction term of {phi_X, phi_Y}^D - phi_[X,Y]:
//   -(Z, [m(X), m(Y)])_sigma with m(X) = Ad_{(h^-)^-1} Pi- Ad_{(h^+)^-1} X.
inline double momentum_bracket_correction(const Tower& tw, int alevel, const PhasePoint& p,
                                          const AlgebraElement& x, const AlgebraElement& y) {
  const Tower::Level& L = tw.lv(alevel);
  auto [hp, hm] = tw.factorize(p.h);
  GroupElement hpi = tw.inverse(hp), hmi = tw.inverse(hm);
  auto mmap = [&](const AlgebraElement& v) {
    return tw.adjoint(hmi, project(L.split, tw.adjoint(hpi, v), Side::minus));
  };
  return -(L.sigma * p.Z.a).dot(bracket(mmap(x), mmap(y)).a);
}

// ---------------------------------------------------------------------------
// Symplectic forms (body-coordinate tangents)

// <omega, (u1, Zdot1) x (u2, Zdot2)> at (h, Z) =
//   -(Zdot1, u2)_sigma + (Zdot2, u1)_sigma + (Z, [u1, u2])_sigma.
inline double omega_eval(const Tower& tw, int alevel, const PhasePoint& p,
                         const AlgebraElement& u1, const AlgebraElement& zdot1,
                         const AlgebraElement& u2, const AlgebraElement& zdot2) {
  const Tower::Level& L = tw.lv(alevel);
  return -(L.sigma * zdot1.a).dot(u2.a) + (L.sigma * zdot2.a).dot(u1.a) +
         (L.sigma * p.Z.a).dot(bracket(u1, u2).a);
}

// ---------------------------------------------------------------------------
// Poisson-Lie structure of H_{L+1}^+ = H_L^+ (x) h_L^+

// Defining form: k_{L+1}(Pi- Ad_{q^-1} xi_m, Pi+ Ad_{q^-1} eta_m) with
// q = (h_plus, Z_plus) taken as a level-(L+1) group element.
inline double pl_bivector_defining(const Tower& tw, int alevel, const PhasePoint& p,
                                   const AlgebraElement& xi_minus,
                                   const AlgebraElement& eta_minus) {
  const Tower::Level& L2 = tw.lv(alevel + 1);
  require_same(xi_minus.alg, L2.alg, "pl_bivector_defining");
  GroupElement q = tw.gpair(p.h, p.Z);
  GroupElement qi = tw.inverse(q);
  AlgebraElement w1 = project(L2.split, tw.adjoint(qi, xi_minus), Side::minus);
  AlgebraElement w2 = project(L2.split, tw.adjoint(qi, eta_minus), Side::plus);
  return pair_form(L2.form, w1, w2);
}

// Block expansion of the same pairing in level-L data; kf is the semidirect
// form factor, so the two paths use identical normalization.
inline double pl_bivector_block(const Tower& tw, int alevel, const PhasePoint& p,
                                const AlgebraElement& xi_minus,
                                const AlgebraElement& eta_minus) {
  const Tower::Level& L = tw.lv(alevel);
  auto [Xm, Vm] = tw.pair_split(xi_minus);
  auto [Ym, Wm] = tw.pair_split(eta_minus);
  GroupElement hpi = tw.inverse(p.h);
  auto dress_right = [&](const AlgebraElement& v) {
    // (h^+)^v (h^+)^-1 = Ad_{h^+} Pi+ Ad_{(h^+)^-1} v
    return tw.adjoint(p.h, project(L.split, tw.adjoint(hpi, v), Side::plus));
  };
  AlgebraElement adz = tw.adjoint(p.h, p.Z);
  const BilinearForm& k = L.form;
  double sum = pair_form(k, Xm, dress_right(Wm)) + pair_form(k, Vm, dress_right(Ym)) +
               pair_form(k, Ym, bracket(dress_right(Xm), adz)) -
               pair_form(k, Xm, bracket(dress_right(Ym), adz)) +
               pair_form(k, bracket(Xm, Ym), adz);
  return 0.5 * sum;
}

// ---------------------------------------------------------------------------
// Dressing vector fields

// Infinitesimal dressing of xi = (Y-, W-) in h_{L+1}^- on H_{L+1}^+ at
// q = (h+, Z+): body group velocity Pi+ Ad_{h+^-1} Y- and fiber velocity
// Pi+(Ad_{h+^-1} W- + [(Y-)^{h+}, Z+]).
inline std::pair<AlgebraElement, AlgebraElement> dressing_vector(const Tower& tw, int alevel,
                                                                 const AlgebraElement& xi_minus,
                                                                 const PhasePoint& p) {
  const Tower::Level& L = tw.lv(alevel);
  auto [Ym, Wm] = tw.pair_split(xi_minus);
  GroupElement hpi = tw.inverse(p.h);
  AlgebraElement ady = tw.adjoint(hpi, Ym);
  AlgebraElement u = project(L.split, ady, Side::plus);
  AlgebraElement ydress = project(L.split, ady, Side::minus);
  AlgebraElement zdot =
      project(L.split, tw.adjoint(hpi, Wm) + bracket(ydress, p.Z), Side::plus);
  return {u, zdot};
}

// Finite dressing: plus factor of Exp(s xi) q.
inline PhasePoint dressing_flow(const Tower& tw, const AlgebraElement& xi_minus,
                                const PhasePoint& p, double s) {
  GroupElement q = tw.gpair(p.h, p.Z);
  GroupElement moved = tw.mul(tw.exp(xi_minus, s), q);
  GroupElement plus = tw.factorize(moved).first;
  return {*plus.base, plus.fiber};
}

// Reciprocal dressing of xi = (X+, Y+) in h_{L+1}^+ on H_{L+1}^- at
// q = (h-, Z-): body velocity A_-(h-) X+ and fiber velocity
// Ad_{h-^-1} Pi- Ad_{h-} (Y+ - [X+, Z-]).
inline std::pair<AlgebraElement, AlgebraElement> reciprocal_dressing(const Tower& tw, int alevel,
                                                                     const AlgebraElement& xi_plus,
                                                                     const PhasePoint& p) {
  const Tower::Level& L = tw.lv(alevel);
  auto [Xp, Yp] = tw.pair_split(xi_plus);
  AlgebraElement u = tw.projector_A(p.h, Xp, Side::minus);
  AlgebraElement zdot = tw.adjoint(tw.inverse(p.h),
                                   project(L.split, tw.adjoint(p.h, Yp - bracket(Xp, p.Z)), Side::minus));
  return {u, zdot};
}

// Finite reciprocal dressing: minus factor of q Exp(s xi) (a right action).
inline PhasePoint reciprocal_flow(const Tower& tw, const AlgebraElement& xi_plus,
                                  const PhasePoint& p, double s) {
  GroupElement q = tw.gpair(p.h, p.Z);
  GroupElement moved = tw.mul(q, tw.exp(xi_plus, s));
  GroupElement minus = tw.factorize(moved).second;
  return {*minus.base, minus.fiber};
}

// Flattened tangent of a (group slot, fiber slot) velocity pair at p.
inline Eigen::VectorXd phase_tangent(const Tower& tw, const PhasePoint& p,
                                     const AlgebraElement& u, const AlgebraElement& zdot) {
  Eigen::VectorXd v(Tower::flat_size(p.h.level) + p.Z.a.size());
  v.head(Tower::flat_size(p.h.level)) = tw.flatten_body_tangent(p.h, u);
  v.tail(p.Z.a.size()) = zdot.a;
  return v;
}

// Central difference of a flow through p, as a flattened tangent.
inline Eigen::VectorXd flow_tangent_fd(const Tower& tw,
                                       const std::function<PhasePoint(double)>& flow,
                                       double step = 1e-5) {
  Eigen::VectorXd vp = phase_flatten(tw, flow(step));
  Eigen::VectorXd vm = phase_flatten(tw, flow(-step));
  return (vp - vm) / (2.0 * step);
}

}  // namespace aks
