#pragma once

#include <map>

#include "brackets.hpp"

namespace aks {

// ---------------------------------------------------------------------------
// Collective Hamiltonian equations on the fiber through (h^-, Z^-)

// Body velocity of h^+ and fiber velocity of Z:
//   (h^+)^-1 hdot^+ = Pi+ Ad_{h^-} L_h(sigma Z)
//   Zdot = sigma^-1 gamma A_-(h^-) [gamma^-1 sigma Z, A_+(h^-) L_h(sigma Z)]
// Both land in the plus subalgebra; the minus blocks vanish identically.
inline std::pair<AlgebraElement, AlgebraElement> collective_rhs(const Tower& tw,
                                                                const Hamiltonian& ham,
                                                                const FiberBasePoint& base,
                                                                const AlgebraElement& z) {
  if (!ham.ad_invariant)
    throw std::invalid_argument("collective_rhs: Hamiltonian is not flagged Ad-invariant");
  const Tower::Level& L = tw.lv(ham.alevel);
  require_same(z.alg, L.alg, "collective_rhs");
  AlgebraElement lh = ham.legendre(CoalgebraElement{L.alg, L.sigma * z.a});
  AlgebraElement xi = project(L.split, tw.adjoint(base.h_minus, lh), Side::plus);
  AlgebraElement u = tw.projector_A(base.h_minus, lh, Side::plus);
  AlgebraElement gz = element(L.alg, L.form.m_inv * (L.sigma * z.a));
  AlgebraElement am = tw.projector_A(base.h_minus, bracket(gz, u), Side::minus);
  AlgebraElement zdot = element(L.alg, L.sigma_inv * (L.form.m * am.a));
  return {xi, zdot};
}

// The collective Hamiltonian as an Observable. By Ad*-invariance h(Phi_B(h,Z))
// collapses to h(sigma Z), so the group-slot differential vanishes identically
// and the fiber-slot differential is sigma L_h(sigma Z).
inline Observable collective_observable(const Tower& tw, const Hamiltonian& ham) {
  const Tower* tp = &tw;
  const int al = ham.alevel;
  Observable obs;
  obs.left_invariant = true;
  obs.eval = [tp, al, ham](const PhasePoint& p) {
    const Tower::Level& L = tp->lv(al);
    return ham.value({L.alg, L.sigma * p.Z.a});
  };
  obs.differential = [tp, al, ham](const PhasePoint& p) {
    const Tower::Level& L = tp->lv(al);
    return Differential{Eigen::VectorXd::Zero(L.alg->dim),
                        L.sigma * ham.legendre({L.alg, L.sigma * p.Z.a}).a};
  };
  return obs;
}

// ---------------------------------------------------------------------------
// (Omega, Gamma) variables

// Gamma = Ad_{h^-} gamma^-1 sigma Z, Omega = Ad_{h^-} L_h(sigma Z) = L_h(gamma Gamma).
inline std::pair<AlgebraElement, AlgebraElement> to_omega_gamma(const Tower& tw,
                                                                const Hamiltonian& ham,
                                                                const FiberBasePoint& base,
                                                                const AlgebraElement& z) {
  const Tower::Level& L = tw.lv(ham.alevel);
  AlgebraElement gamma = tw.adjoint(base.h_minus, element(L.alg, L.form.m_inv * (L.sigma * z.a)));
  AlgebraElement omega = tw.adjoint(base.h_minus, ham.legendre(CoalgebraElement{L.alg, L.sigma * z.a}));
  return {omega, gamma};
}

inline AlgebraElement from_gamma(const Tower& tw, const Hamiltonian& ham,
                                 const FiberBasePoint& base, const AlgebraElement& gamma) {
  const Tower::Level& L = tw.lv(ham.alevel);
  AlgebraElement w = tw.adjoint(tw.inverse(base.h_minus), gamma);
  return element(L.alg, L.sigma_inv * (L.form.m * w.a));
}

inline AlgebraElement omega_of_gamma(const Tower& tw, const Hamiltonian& ham,
                                     const AlgebraElement& gamma) {
  const Tower::Level& L = tw.lv(ham.alevel);
  return ham.legendre(CoalgebraElement{L.alg, L.form.m * gamma.a});
}

enum class GammaForm { projected_plus = 0, projected_minus = 1, full_minus = 2 };

// Gammadot in the three equivalent-on-character-locus forms:
//   form 0:  Pi-[Gamma, Omega+]
//   form 1: -Pi-[Gamma, Omega-]
//   form 2: -[Gamma, Omega-]
// The group slot always moves by Omega+.
inline std::pair<AlgebraElement, AlgebraElement> omega_gamma_rhs(const Tower& tw,
                                                                 const Hamiltonian& ham,
                                                                 const AlgebraElement& gamma,
                                                                 GammaForm form) {
  const Tower::Level& L = tw.lv(ham.alevel);
  AlgebraElement omega = omega_of_gamma(tw, ham, gamma);
  AlgebraElement op = project(L.split, omega, Side::plus);
  AlgebraElement om = project(L.split, omega, Side::minus);
  AlgebraElement gdot = zero_element(L.alg);
  switch (form) {
    case GammaForm::projected_plus:
      gdot = project(L.split, bracket(gamma, op), Side::minus);
      break;
    case GammaForm::projected_minus:
      gdot = -1.0 * project(L.split, bracket(gamma, om), Side::minus);
      break;
    case GammaForm::full_minus:
      gdot = -1.0 * bracket(gamma, om);
      break;
  }
  return {op, gdot};
}

// ---------------------------------------------------------------------------
// The invariant Theta along solutions: factorize k = h^+ g^- and push Gamma
// back through g^-.
inline AlgebraElement theta_map(const Tower& tw, const Hamiltonian& ham, const GroupElement& k,
                                const AlgebraElement& gamma) {
  const Tower::Level& L = tw.lv(ham.alevel);
  GroupElement gm = tw.factorize(k).second;
  AlgebraElement w = tw.adjoint(tw.inverse(gm), gamma);
  return ham.legendre(CoalgebraElement{L.alg, L.form.m * w.a});
}

// ---------------------------------------------------------------------------
// One level down: the nested variables of a level-m system written on level
// m-1 data. Pack: Omega_m = (Ot, [R-, Ot] + N), Gamma_m = (Gt, [R-, Gt] + M).

inline AlgebraElement nested_pack(const Tower& tw, const AlgebraElement& head,
                                  const AlgebraElement& tail, const AlgebraElement& r_minus) {
  return tw.pair_join(head, bracket(r_minus, head) + tail);
}

inline std::pair<AlgebraElement, AlgebraElement> nested_unpack(const Tower& tw,
                                                               const AlgebraElement& packed,
                                                               const AlgebraElement& r_minus) {
  auto [head, second] = tw.pair_split(packed);
  return {head, second - bracket(r_minus, head)};
}

struct NestedState {
  GroupElement h_plus;      // level m-1 plus group
  AlgebraElement z_plus;    // fiber of the level-m plus group element
  AlgebraElement gamma_t;   // Gamma-tilde
  AlgebraElement m_t;       // M
};

struct NestedDerivative {
  AlgebraElement xi;        // body velocity of h_plus
  AlgebraElement zdot;
  AlgebraElement gammadot;
  AlgebraElement mdot;
};

// The general four-line system; pass r_minus = 0 for the reduced base point.
inline NestedDerivative nested_rhs(const Tower& tw, const Hamiltonian& ham,
                                   const NestedState& st, const AlgebraElement& r_minus) {
  const int m = ham.alevel;
  if (m < 1) throw std::invalid_argument("nested_rhs: needs a level >= 1 Hamiltonian");
  const Tower::Level& Ld = tw.lv(m - 1);
  require_same(st.gamma_t.alg, Ld.alg, "nested_rhs");
  // Recover (Omega-tilde, N) from the packed Legendre image of Gamma_m.
  AlgebraElement gamma_m = nested_pack(tw, st.gamma_t, st.m_t, r_minus);
  AlgebraElement omega_m = omega_of_gamma(tw, ham, gamma_m);
  auto [ot, second] = tw.pair_split(omega_m);
  AlgebraElement n = second - bracket(r_minus, ot);
  AlgebraElement otp = project(Ld.split, ot, Side::plus);

  NestedDerivative d{otp,
                     -1.0 * bracket(otp, st.z_plus) +
                         project(Ld.split, bracket(r_minus, ot) + n, Side::plus),
                     project(Ld.split, bracket(st.gamma_t, otp), Side::minus),
                     zero_element(Ld.alg)};
  AlgebraElement t1 = project(Ld.split, bracket(st.gamma_t, project(Ld.split, n, Side::plus)), Side::minus);
  AlgebraElement t2 = project(Ld.split, bracket(st.m_t, otp), Side::minus);
  AlgebraElement t3 = bracket(d.gammadot, r_minus);
  AlgebraElement t4 = project(Ld.split,
                              bracket(st.gamma_t, project(Ld.split, bracket(r_minus, ot), Side::plus)),
                              Side::minus);
  AlgebraElement t5 = project(Ld.split, bracket(bracket(r_minus, st.gamma_t), otp), Side::minus);
  d.mdot = t1 + t2 + t3 + t4 + t5;
  return d;
}

// ---------------------------------------------------------------------------
// RK4 integration on flattened states

using Rhs = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

inline Eigen::VectorXd rk4_step(const Rhs& f, double t, double dt, const Eigen::VectorXd& y) {
  Eigen::VectorXd k1 = f(t, y);
  Eigen::VectorXd k2 = f(t + 0.5 * dt, y + (0.5 * dt) * k1);
  Eigen::VectorXd k3 = f(t + 0.5 * dt, y + (0.5 * dt) * k2);
  Eigen::VectorXd k4 = f(t + dt, y + dt * k3);
  return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct Trajectory {
  int group_level = 0;
  std::string coordinates;  // "phase" or "omega_gamma"
  std::vector<std::string> columns;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<std::pair<std::string, std::vector<double>>> invariants;
};

inline Trajectory integrate(const Rhs& rhs, const Eigen::VectorXd& y0, double t0, double t1,
                            double dt,
                            const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& snap) {
  if (dt <= 0.0) throw std::invalid_argument("integrate: dt must be positive");
  if (t1 < t0) throw std::invalid_argument("integrate: t1 < t0");
  Trajectory out;
  const int n = static_cast<int>(std::llround((t1 - t0) / dt));
  Eigen::VectorXd y = y0;
  out.times.push_back(t0);
  out.states.push_back(y);
  for (int i = 0; i < n; ++i) {
    double t = t0 + i * dt;
    y = rk4_step(rhs, t, dt, y);
    if (!y.allFinite())
      throw std::runtime_error("integrate: non-finite state at t = " + fmt17(t + dt));
    if (snap) y = snap(y);
    out.times.push_back(t0 + (i + 1) * dt);
    out.states.push_back(y);
  }
  return out;
}

// ---------------------------------------------------------------------------
// State layout shared by the coordinate systems: [flatten(h+) | mid | flatten(k)]
// with mid = Z ("phase") or Gamma ("omega_gamma"). k is co-integrated by
// kdot = k Theta(k, Gamma) purely to expose the Theta drift of the method.

struct StateView {
  GroupElement h_plus;
  AlgebraElement mid;
  GroupElement k;
};

inline StateView split_state(const Tower& tw, int alevel, const Eigen::VectorXd& y) {
  const int gs = Tower::flat_size(alevel);
  const int d = tw.lv(alevel).alg->dim;
  // Extra trailing columns (e.g. a recorded g- factor) are allowed and ignored.
  if (y.size() < 2 * gs + d) throw std::invalid_argument("split_state: size mismatch");
  return {tw.unflatten(alevel, y.head(gs)), element(tw.lv(alevel).alg, y.segment(gs, d)),
          tw.unflatten(alevel, y.segment(gs + d, gs))};
}

inline Eigen::VectorXd join_state(const Tower& tw, const StateView& sv) {
  const int gs = Tower::flat_size(sv.h_plus.level);
  Eigen::VectorXd y(2 * gs + sv.mid.a.size());
  y.head(gs) = tw.flatten(sv.h_plus);
  y.segment(gs, sv.mid.a.size()) = sv.mid.a;
  y.tail(gs) = tw.flatten(sv.k);
  return y;
}

inline std::vector<std::string> state_columns(const Tower& tw, int alevel,
                                              const std::string& mid_prefix) {
  std::vector<std::string> cols = tw.group_col_names(alevel, "h");
  for (const auto& lb : tw.lv(alevel).alg->labels) cols.push_back(mid_prefix + "_" + lb);
  for (const auto& n : tw.group_col_names(alevel, "k")) cols.push_back(n);
  return cols;
}

inline Eigen::VectorXd snap_state(const Tower& tw, int alevel, const Eigen::VectorXd& y) {
  StateView sv = split_state(tw, alevel, y);
  sv.h_plus = tw.reproject(sv.h_plus, Reproject::plus_group);
  sv.k = tw.reproject(sv.k, Reproject::full_group);
  return join_state(tw, sv);
}

// RK4 trajectory of the collective system in phase coordinates (h+, Z).
inline Trajectory simulate_phase(const Tower& tw, const Hamiltonian& ham,
                                 const FiberBasePoint& base, const GroupElement& h_plus0,
                                 const AlgebraElement& z0, double t0, double t1, double dt) {
  const int L = ham.alevel;
  Rhs rhs = [&tw, &ham, &base, L](double, const Eigen::VectorXd& y) {
    StateView sv = split_state(tw, L, y);
    auto [xi, zdot] = collective_rhs(tw, ham, base, sv.mid);
    const Tower::Level& lv = tw.lv(L);
    AlgebraElement gamma =
        tw.adjoint(base.h_minus, element(lv.alg, lv.form.m_inv * (lv.sigma * sv.mid.a)));
    // Stage points sit O(dt^2) off the group; retract before factorizing.
    GroupElement k = tw.reproject(sv.k, Reproject::full_group);
    AlgebraElement theta = theta_map(tw, ham, k, gamma);
    Eigen::VectorXd dy(y.size());
    const int gs = Tower::flat_size(L);
    dy.head(gs) = tw.flatten_body_tangent(sv.h_plus, xi);
    dy.segment(gs, sv.mid.a.size()) = zdot.a;
    dy.tail(gs) = tw.flatten_body_tangent(k, theta);
    return dy;
  };
  StateView sv0{h_plus0, z0, h_plus0};
  Trajectory tr = integrate(rhs, join_state(tw, sv0), t0, t1, dt,
                            [&tw, L](const Eigen::VectorXd& y) { return snap_state(tw, L, y); });
  tr.group_level = L;
  tr.coordinates = "phase";
  tr.columns = state_columns(tw, L, "Z");
  return tr;
}

// RK4 trajectory in (Omega, Gamma) coordinates.
inline Trajectory simulate_omega_gamma(const Tower& tw, const Hamiltonian& ham,
                                       const GroupElement& h_plus0, const AlgebraElement& gamma0,
                                       GammaForm form, double t0, double t1, double dt) {
  const int L = ham.alevel;
  Rhs rhs = [&tw, &ham, form, L](double, const Eigen::VectorXd& y) {
    StateView sv = split_state(tw, L, y);
    auto [xi, gdot] = omega_gamma_rhs(tw, ham, sv.mid, form);
    GroupElement k = tw.reproject(sv.k, Reproject::full_group);
    AlgebraElement theta = theta_map(tw, ham, k, sv.mid);
    Eigen::VectorXd dy(y.size());
    const int gs = Tower::flat_size(L);
    dy.head(gs) = tw.flatten_body_tangent(sv.h_plus, xi);
    dy.segment(gs, sv.mid.a.size()) = gdot.a;
    dy.tail(gs) = tw.flatten_body_tangent(k, theta);
    return dy;
  };
  StateView sv0{h_plus0, gamma0, h_plus0};
  Trajectory tr = integrate(rhs, join_state(tw, sv0), t0, t1, dt,
                            [&tw, L](const Eigen::VectorXd& y) { return snap_state(tw, L, y); });
  tr.group_level = L;
  tr.coordinates = "omega_gamma";
  tr.columns = state_columns(tw, L, "Gamma");
  return tr;
}

// ---------------------------------------------------------------------------
// Invariant series along a stored trajectory

inline void attach_invariants(const Tower& tw, const Hamiltonian& ham,
                              const FiberBasePoint* base, Trajectory& tr) {
  const int L = ham.alevel;
  const Tower::Level& lv = tw.lv(L);
  std::vector<double> theta_drift, energy, casimir, commutator, plus_defect;
  Eigen::VectorXd theta0;
  for (size_t i = 0; i < tr.states.size(); ++i) {
    StateView sv = split_state(tw, L, tr.states[i]);
    AlgebraElement gamma = sv.mid;
    if (tr.coordinates == "phase") {
      if (!base) throw std::invalid_argument("attach_invariants: phase coordinates need a base point");
      gamma = tw.adjoint(base->h_minus, element(lv.alg, lv.form.m_inv * (lv.sigma * sv.mid.a)));
    }
    AlgebraElement theta = theta_map(tw, ham, sv.k, gamma);
    if (i == 0) theta0 = theta.a;
    theta_drift.push_back((theta.a - theta0).cwiseAbs().maxCoeff());
    energy.push_back(ham.value(CoalgebraElement{lv.alg, lv.form.m * gamma.a}));
    casimir.push_back(pair_form(lv.form, gamma, gamma));
    AlgebraElement omega = omega_of_gamma(tw, ham, gamma);
    commutator.push_back(bracket(gamma, omega).a.cwiseAbs().maxCoeff());
    AlgebraElement om = project(lv.split, omega, Side::minus);
    plus_defect.push_back(project(lv.split, bracket(gamma, om), Side::plus).a.cwiseAbs().maxCoeff());
  }
  tr.invariants = {{"theta_drift", theta_drift},
                   {"energy", energy},
                   {"gamma_casimir", casimir},
                   {"commutator_norm", commutator},
                   {"plus_defect", plus_defect}};
}

inline const std::vector<double>& invariant_series(const Trajectory& tr, const std::string& name) {
  for (const auto& [n, vals] : tr.invariants)
    if (n == name) return vals;
  throw std::invalid_argument("invariant_series: no invariant named '" + name + "'");
}

// Largest excursion from the initial value.
inline double invariant_drift(const Trajectory& tr, const std::string& name) {
  const std::vector<double>& vals = invariant_series(tr, name);
  double r = 0.0;
  for (double v : vals) r = std::max(r, std::abs(v - vals.front()));
  return r;
}

inline double invariant_max(const Trajectory& tr, const std::string& name) {
  const std::vector<double>& vals = invariant_series(tr, name);
  double r = 0.0;
  for (double v : vals) r = std::max(r, std::abs(v));
  return r;
}

}  // namespace aks
