#pragma once

#include <functional>
#include <string>

#include "group.hpp"

namespace aks {

// Collective Hamiltonian data: a function h on the dual at a fixed level and
// its Legendre-type map L_h, defined by k(L_h(eta), X) = d/dt h(eta + t gamma(X)).
struct Hamiltonian {
  std::string kind;
  int alevel = 0;
  bool ad_invariant = false;
  std::function<double(const CoalgebraElement&)> value;
  std::function<AlgebraElement(const CoalgebraElement&)> legendre;
};

// h(eta) = 1/2 k(gamma^-1 eta, gamma^-1 eta), L_h = gamma^-1.
inline Hamiltonian make_quadratic_km(const Tower& tw, int alevel) {
  const Tower* tp = &tw;
  Hamiltonian h;
  h.kind = "quadratic_km";
  h.alevel = alevel;
  h.ad_invariant = true;
  h.value = [tp, alevel](const CoalgebraElement& eta) {
    const Tower::Level& L = tp->lv(alevel);
    require_same(eta.alg, L.alg, "quadratic_km");
    return 0.5 * eta.a.dot(L.form.m_inv * eta.a);
  };
  h.legendre = [tp, alevel](const CoalgebraElement& eta) {
    const Tower::Level& L = tp->lv(alevel);
    require_same(eta.alg, L.alg, "quadratic_km");
    return element(L.alg, L.form.m_inv * eta.a);
  };
  return h;
}

// The degree-2 invariant on the level-1 dual built from the complex Killing
// form: h(eta) = -1/16 Re kappa(X0, Y0) with (X0, Y0) = gamma^-1 eta, whose
// Legendre map is multiplication by i/2 composed with gamma^-1.
inline Hamiltonian make_sl2c_h2(const Tower& tw) {
  const Tower* tp = &tw;
  Hamiltonian h;
  h.kind = "sl2c_h2";
  h.alevel = 1;
  h.ad_invariant = true;
  h.value = [tp](const CoalgebraElement& eta) {
    const Tower::Level& L = tp->lv(1);
    require_same(eta.alg, L.alg, "sl2c_h2");
    AlgebraElement pair = element(L.alg, L.form.m_inv * eta.a);
    auto [x0, y0] = tp->pair_split(pair);
    const Sl2cModel& md = tp->model();
    return -md.kappa(md.realize(x0), md.realize(y0)).real() / 16.0;
  };
  h.legendre = [tp](const CoalgebraElement& eta) {
    const Tower::Level& L = tp->lv(1);
    require_same(eta.alg, L.alg, "sl2c_h2");
    AlgebraElement pair = element(L.alg, L.form.m_inv * eta.a);
    auto [x0, y0] = tp->pair_split(pair);
    const Sl2cModel& md = tp->model();
    return tp->pair_join(0.5 * md.j_multiply(x0), 0.5 * md.j_multiply(y0));
  };
  return h;
}

// h = 0: every flow degenerates to rest; useful as a CLI sanity scenario.
inline Hamiltonian make_zero(const Tower& tw, int alevel) {
  const Tower* tp = &tw;
  Hamiltonian h;
  h.kind = "zero";
  h.alevel = alevel;
  h.ad_invariant = true;
  h.value = [](const CoalgebraElement&) { return 0.0; };
  h.legendre = [tp, alevel](const CoalgebraElement& eta) {
    require_same(eta.alg, tp->lv(alevel).alg, "zero");
    return zero_element(eta.alg);
  };
  return h;
}

inline Hamiltonian make_hamiltonian(const Tower& tw, const std::string& kind, int alevel) {
  if (kind == "quadratic_km") return make_quadratic_km(tw, alevel);
  if (kind == "zero") return make_zero(tw, alevel);
  if (kind == "sl2c_h2") {
    if (alevel != 1) throw std::invalid_argument("make_hamiltonian: sl2c_h2 lives at level 1");
    return make_sl2c_h2(tw);
  }
  throw std::invalid_argument("make_hamiltonian: unknown kind '" + kind + "'");
}

// Defect of the defining relation k(L_h(eta), X) = d/dt h(eta + t gamma(X)).
inline double legendre_residual(const Tower& tw, const Hamiltonian& h,
                                const CoalgebraElement& eta, const AlgebraElement& x,
                                double step = 1e-5) {
  const Tower::Level& L = tw.lv(h.alevel);
  CoalgebraElement gx = form_raise(L.form, x);
  CoalgebraElement ep = {eta.alg, eta.a + step * gx.a};
  CoalgebraElement em = {eta.alg, eta.a - step * gx.a};
  double fd = (h.value(ep) - h.value(em)) / (2.0 * step);
  return std::abs(pair_form(L.form, h.legendre(eta), x) - fd);
}

// Defect of L_h(Ad*_g eta) = Ad_{g^-1} L_h(eta).
inline double legendre_equivariance_residual(const Tower& tw, const Hamiltonian& h,
                                             const GroupElement& g, const CoalgebraElement& eta) {
  AlgebraElement lhs = h.legendre(tw.coadjoint(g, eta));
  AlgebraElement rhs = tw.adjoint(tw.inverse(g), h.legendre(eta));
  return (lhs.a - rhs.a).cwiseAbs().maxCoeff();
}

inline double value_invariance_residual(const Tower& tw, const Hamiltonian& h,
                                        const GroupElement& g, const CoalgebraElement& eta) {
  return std::abs(h.value(tw.coadjoint(g, eta)) - h.value(eta));
}

}  // namespace aks
