#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "aks/io.hpp"
#include "aks/random.hpp"
#include "aks/solver.hpp"

namespace aks {

// ---------------------------------------------------------------------------
// Named residual checks grouped into suites. A check passes when its residual
// is finite and within tolerance; tolerance 0 marks identities that hold in
// exact (dyadic) arithmetic.

struct Check {
  std::string name;
  double residual = 0.0;
  double tol = 0.0;
  bool pass = false;
};

struct Suite {
  std::string name;
  std::vector<Check> checks;
  bool pass() const {
    for (const Check& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

inline void add_check(Suite& s, const std::string& name, double residual, double tol) {
  s.checks.push_back({name, residual, tol, std::isfinite(residual) && residual <= tol});
}

inline double max_abs(const Eigen::VectorXd& v) {
  return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
}

inline double max_abs(const Eigen::MatrixXd& m) {
  return m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
}

inline double max_absc(const Mat2c& m) { return m.cwiseAbs().maxCoeff(); }

// A random point of H_L x h_L sitting on the fiber over (h-, z-).
struct FiberDraw {
  FiberBasePoint base;
  PhasePoint p;
};

inline FiberDraw rand_fiber_point(Rng& rng, const Tower& tw, int alevel) {
  GroupElement hm = rand_minus_group(rng, tw, alevel);
  AlgebraElement zm = rand_side_element(rng, tw, alevel, Side::minus);
  FiberBasePoint base = make_base_point(tw, hm, zm);
  PhasePoint p{tw.mul(rand_plus_group(rng, tw, alevel), hm),
               rand_side_element(rng, tw, alevel, Side::plus) + zm};
  return {base, p};
}

// ---------------------------------------------------------------------------
// Suite: algebra (structure constants, pairings, splittings, characters)

inline Suite verify_algebra(const Tower& tw, uint64_t seed) {
  Suite s{"algebra", {}};
  Rng rng(seed);
  const Sl2cModel& md = tw.model();

  {
    double ras = 0, rja = 0, rsy = 0, rad = 0, riso = 0, rcl = 0, rsig = 0;
    for (int m = 0; m <= tw.max_level(); ++m) {
      const Tower::Level& L = tw.lv(m);
      ras = std::max(ras, check_antisymmetry(L.alg).max_residual);
      rja = std::max(rja, check_jacobi(L.alg).max_residual);
      rsy = std::max(rsy, max_abs(Eigen::MatrixXd(L.form.m - L.form.m.transpose())));
      rad = std::max(rad, ad_invariance_residual(L.form));
      riso = std::max(riso, isotropy_residual(L.form, L.split));
      rcl = std::max(rcl, std::max(closure_residual(L.split, Side::plus),
                                   closure_residual(L.split, Side::minus)));
      Eigen::MatrixXd id = Eigen::MatrixXd::Identity(L.alg->dim, L.alg->dim);
      rsig = std::max(rsig, max_abs(Eigen::MatrixXd(L.sigma * L.sigma_inv - id)));
    }
    add_check(s, "bracket antisymmetry (levels 0..3)", ras, 0.0);
    add_check(s, "jacobi identity (levels 0..3)", rja, 0.0);
    add_check(s, "pairing symmetry", rsy, 0.0);
    add_check(s, "pairing ad-invariance", rad, 0.0);
    add_check(s, "splitting isotropy", riso, 0.0);
    add_check(s, "subalgebra closure on both sides", rcl, 0.0);
    add_check(s, "sigma inverse pairs", rsig, 0.0);
  }

  // Dyadic recursion of the pairing and of sigma between consecutive levels.
  {
    double rk = 0, rs = 0;
    for (int m = 1; m <= tw.max_level(); ++m) {
      const Tower::Level& L = tw.lv(m);
      const Tower::Level& P = tw.lv(m - 1);
      const int d = P.alg->dim;
      rk = std::max(rk, max_abs(Eigen::MatrixXd(L.form.m.block(0, d, d, d) - 0.5 * P.form.m)));
      rk = std::max(rk, max_abs(Eigen::MatrixXd(L.form.m.block(d, 0, d, d) - 0.5 * P.form.m)));
      rk = std::max(rk, max_abs(Eigen::MatrixXd(L.form.m.block(0, 0, d, d))));
      rk = std::max(rk, max_abs(Eigen::MatrixXd(L.form.m.block(d, d, d, d))));
      rs = std::max(rs, max_abs(Eigen::MatrixXd(L.sigma.block(0, 0, d, d) - 0.5 * P.sigma)));
      rs = std::max(rs, max_abs(Eigen::MatrixXd(L.sigma.block(d, d, d, d) - 0.5 * P.sigma)));
      rs = std::max(rs, max_abs(Eigen::MatrixXd(L.sigma.block(0, d, d, d))));
      rs = std::max(rs, max_abs(Eigen::MatrixXd(L.sigma.block(d, 0, d, d))));
    }
    add_check(s, "pairing recursion halves the cross blocks", rk, 0.0);
    add_check(s, "sigma recursion halves the diagonal blocks", rs, 0.0);
  }

  // The matrix model behind level 0.
  {
    double rc = 0, rk = 0;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        Mat2c comm = md.basis[i] * md.basis[j] - md.basis[j] * md.basis[i];
        rc = std::max(rc, max_abs(Eigen::VectorXd(md.to_coefficients(comm) - md.alg->ad[i].col(j))));
        rk = std::max(rk, std::abs(md.k0(md.basis[i], md.basis[j]) - md.form.m(i, j)));
      }
    add_check(s, "structure constants match matrix commutators", rc, 0.0);
    add_check(s, "pairing table matches the trace form", rk, 0.0);

    double rrt = 0, rq = 0, rj = 0;
    for (int n = 0; n < 20; ++n) {
      AlgebraElement x = rand_element(rng, md.alg);
      AlgebraElement y = rand_element(rng, md.alg);
      Mat2c mx = md.realize(x), my = md.realize(y);
      rrt = std::max(rrt, max_abs(Eigen::VectorXd(md.to_coefficients(mx) - x.a)));
      rq = std::max(rq, std::abs(md.k0(mx, my) + 0.25 * md.kappa(mx, my).imag()));
      rj = std::max(rj, max_absc(Mat2c(md.realize(md.j_multiply(x)) - cplx(0, 1) * mx)));
    }
    add_check(s, "coefficient round trip (20 draws)", rrt, 1e-13);
    add_check(s, "pairing is the quarter imaginary trace", rq, 1e-14);
    add_check(s, "j acts as multiplication by i", rj, 1e-14);
    add_check(s, "j squares to minus one",
              max_abs(Eigen::MatrixXd(md.jmat * md.jmat + Eigen::MatrixXd::Identity(6, 6))), 0.0);
  }

  // sigma = blockdiag(zeta, vartheta) with vartheta carried over from zeta by
  // the cross pairing: vartheta = C^T zeta^-1 C, C = k0(plus basis, minus basis).
  {
    Eigen::Matrix3d C = md.form.m.block(0, 3, 3, 3);
    Eigen::Matrix3d want = C.transpose() * md.zeta.inverse() * C;
    add_check(s, "vartheta solves the dual equation", max_abs(Eigen::MatrixXd(md.vartheta - want)),
              0.0);
    double rb = max_abs(Eigen::MatrixXd(md.sigma.topLeftCorner(3, 3) - md.zeta));
    rb = std::max(rb, max_abs(Eigen::MatrixXd(md.sigma.bottomRightCorner(3, 3) - md.vartheta)));
    rb = std::max(rb, max_abs(Eigen::MatrixXd(md.sigma.topRightCorner(3, 3))));
    rb = std::max(rb, max_abs(Eigen::MatrixXd(md.sigma.bottomLeftCorner(3, 3))));
    add_check(s, "sigma is block diagonal in (zeta, vartheta)", rb, 0.0);
  }

  // Invariance of the pairing under the group.
  {
    double r = 0;
    for (int n = 0; n < 100; ++n) {
      GroupElement g = rand_group(rng, tw, 0);
      AlgebraElement x = rand_element(rng, md.alg);
      AlgebraElement y = rand_element(rng, md.alg);
      r = std::max(r, std::abs(pair_form(md.form, tw.adjoint(g, x), tw.adjoint(g, y)) -
                               pair_form(md.form, x, y)));
    }
    add_check(s, "pairing invariance under the group (100 draws)", r, 1e-10);
  }

  // Characters of the minus subalgebra: one line at level 0, a plane at level 1.
  {
    std::vector<CoalgebraElement> ch0 = character_space(md.alg, md.split.minus_idx);
    add_check(s, "minus characters are one line at level 0",
              std::abs(static_cast<double>(ch0.size()) - 1.0), 0.0);
    double rsup = 1.0;
    if (ch0.size() == 1) {
      const Eigen::VectorXd& v = ch0[0].a;
      rsup = std::max({std::abs(v(iE)), std::abs(v(iIE)), std::abs(std::abs(v(iH)) - 1.0)});
    }
    add_check(s, "the level-0 character is the H direction", rsup, 1e-10);

    const Tower::Level& L1 = tw.lv(1);
    std::vector<CoalgebraElement> ch1 = character_space(L1.alg, L1.split.minus_idx);
    add_check(s, "level-1 minus characters form a plane",
              std::abs(static_cast<double>(ch1.size()) - 2.0), 0.0);
    double rs1 = 1.0, rann = 1.0;
    if (ch1.size() == 2) {
      rs1 = 0.0;
      rann = 0.0;
      for (const CoalgebraElement& xi : ch1) {
        for (int i : {int(iE), int(iIE), 6 + int(iE), 6 + int(iIE)})
          rs1 = std::max(rs1, std::abs(xi.a(i)));
        for (int n = 0; n < 20; ++n) {
          AlgebraElement x = rand_side_element(rng, tw, 1, Side::minus);
          AlgebraElement y = rand_side_element(rng, tw, 1, Side::minus);
          rann = std::max(rann, std::abs(pair_dual(xi, bracket(x, y))));
        }
      }
    }
    add_check(s, "level-1 characters live on the H lines", rs1, 1e-10);
    add_check(s, "level-1 characters kill minus commutators", rann, 1e-12);
  }

  return s;
}

// ---------------------------------------------------------------------------
// Suite: groups (factorizations, exponentials, adjoints, tangents)

inline Suite verify_groups(const Tower& tw, uint64_t seed) {
  Suite s{"groups", {}};
  Rng rng(seed);
  const Sl2cModel& md = tw.model();

  // Iwasawa factorization over 1000 determinant-one draws.
  {
    double rres = 0, runi = 0, rtri = 0;
    for (int n = 0; n < 1000; ++n) {
      Mat2c g;
      double det_abs = 0.0;
      do {
        for (int r = 0; r < 2; ++r)
          for (int c = 0; c < 2; ++c) g(r, c) = cplx(rand_real(rng, -2, 2), rand_real(rng, -2, 2));
        det_abs = std::abs(det2(g));
      } while (det_abs < 1e-3);
      g /= std::sqrt(det2(g));
      auto [u, b] = iwasawa_factorize(g);
      rres = std::max(rres, max_absc(Mat2c(u * b - g)));
      runi = std::max(runi, max_absc(Mat2c(u.adjoint() * u - Mat2c::Identity())));
      rtri = std::max(rtri, std::abs(b(1, 0)));
      rtri = std::max(rtri, std::abs(b(0, 0).imag()));
      rtri = std::max(rtri, std::abs(b(1, 1).imag()));
      rtri = std::max(rtri, std::max(0.0, -b(0, 0).real()));
    }
    add_check(s, "iwasawa factorization reassembles (1000 draws)", rres, 1e-12);
    add_check(s, "iwasawa unitary factor", runi, 1e-12);
    add_check(s, "iwasawa triangular factor shape", rtri, 1e-12);
  }

  // Closed exponentials of the unitary directions.
  {
    double re = 0, ri = 0;
    for (int n = 0; n < 50; ++n) {
      Eigen::Vector3d a = rand_unit3(rng);
      double tau = rand_real(rng, -2, 2);
      Mat2c base = md.realize(su2_element(tw, a));
      re = std::max(re, max_absc(Mat2c(exp_su2(md, a, tau) - exp_matrix(Mat2c(tau * base)))));
      ri = std::max(ri, max_absc(Mat2c(exp_i_su2(md, a, tau) -
                                       exp_matrix(Mat2c(tau * (cplx(0, 1) * base))))));
    }
    add_check(s, "exp_su2 matches the series exponential", re, 1e-12);
    add_check(s, "exp_i_su2 matches the series exponential", ri, 1e-12);
  }

  // Group laws at levels 0..2.
  {
    double r1p = 0, rass = 0, rinv = 0;
    for (int level = 0; level <= 2; ++level)
      for (int n = 0; n < 20; ++n) {
        AlgebraElement x = rand_element(rng, tw.lv(level).alg, 0.8);
        double t1 = rand_real(rng), t2 = rand_real(rng);
        r1p = std::max(r1p, max_abs(Eigen::VectorXd(
                                tw.flatten(tw.exp(x, t1 + t2)) -
                                tw.flatten(tw.mul(tw.exp(x, t1), tw.exp(x, t2))))));
        GroupElement a = rand_group(rng, tw, level);
        GroupElement b = rand_group(rng, tw, level);
        GroupElement c = rand_group(rng, tw, level);
        rass = std::max(rass, max_abs(Eigen::VectorXd(tw.flatten(tw.mul(tw.mul(a, b), c)) -
                                                      tw.flatten(tw.mul(a, tw.mul(b, c))))));
        rinv = std::max(rinv, max_abs(Eigen::VectorXd(tw.flatten(tw.mul(a, tw.inverse(a))) -
                                                      tw.flatten(tw.identity(level)))));
      }
    add_check(s, "one-parameter subgroups (levels 0..2)", r1p, 1e-10);
    add_check(s, "associativity", rass, 1e-12);
    add_check(s, "inverses", rinv, 1e-12);
  }

  // Factorization round trips with membership tags, levels 0..3.
  {
    double rfac = 0, rtag = 0;
    for (int level = 0; level <= tw.max_level(); ++level) {
      const int draws = level == 3 ? 10 : 50;
      for (int n = 0; n < draws; ++n) {
        GroupElement g = rand_group(rng, tw, level, 0.6);
        auto [hp, hm] = tw.factorize(g);
        rfac = std::max(rfac,
                        max_abs(Eigen::VectorXd(tw.flatten(tw.mul(hp, hm)) - tw.flatten(g))));
        rtag = std::max(rtag, tw.in_plus_group(hp) ? 0.0 : 1.0);
        rtag = std::max(rtag, tw.in_minus_group(hm) ? 0.0 : 1.0);
      }
    }
    add_check(s, "factorization round trip (levels 0..3)", rfac, 1e-10);
    add_check(s, "factor membership tags", rtag, 0.0);
  }

  // Ad as a bracket automorphism and invariance of the level-2 pairing.
  {
    double rbr = 0, rk = 0;
    const Tower::Level& L2 = tw.lv(2);
    for (int n = 0; n < 20; ++n) {
      GroupElement g = rand_group(rng, tw, 2, 0.6);
      AlgebraElement x = rand_element(rng, L2.alg);
      AlgebraElement y = rand_element(rng, L2.alg);
      rbr = std::max(rbr, max_abs(Eigen::VectorXd(
                              tw.adjoint(g, bracket(x, y)).a -
                              bracket(tw.adjoint(g, x), tw.adjoint(g, y)).a)));
      rk = std::max(rk, std::abs(pair_form(L2.form, tw.adjoint(g, x), tw.adjoint(g, y)) -
                                 pair_form(L2.form, x, y)));
    }
    add_check(s, "Ad is a bracket automorphism (level 2)", rbr, 1e-10);
    add_check(s, "Ad invariance of the level-2 pairing", rk, 1e-10);
  }

  // Adjoint matrices and coadjoint duality.
  {
    double rm = 0, rco = 0;
    for (int level = 0; level <= 2; ++level)
      for (int n = 0; n < 10; ++n) {
        GroupElement g = rand_group(rng, tw, level);
        AlgebraElement x = rand_element(rng, tw.lv(level).alg);
        rm = std::max(rm, max_abs(Eigen::VectorXd(tw.adjoint_matrix(g) * x.a -
                                                  tw.adjoint(g, x).a)));
        CoalgebraElement xi{tw.lv(level).alg, rand_vector(rng, tw.lv(level).alg->dim)};
        rco = std::max(rco, std::abs(pair_dual(tw.coadjoint(g, xi), x) -
                                     pair_dual(xi, tw.adjoint(g, x))));
      }
    add_check(s, "adjoint matrix agrees with the adjoint action", rm, 1e-13);
    add_check(s, "coadjoint duality", rco, 1e-13);
  }

  // Closed forms of the triangular adjoint and its split projections.
  {
    double rad = 0, rp = 0, rmn = 0;
    for (int n = 0; n < 100; ++n) {
      GroupElement h = rand_minus_group(rng, tw, 0);
      AlgebraElement x = rand_element(rng, md.alg);
      rad = std::max(rad, max_abs(Eigen::VectorXd(adjoint_b_closed(h.m, x).a -
                                                  tw.adjoint(h, x).a)));
      rp = std::max(rp, max_abs(Eigen::VectorXd(a_plus_closed(h.m, x).a -
                                                tw.projector_A(h, x, Side::plus).a)));
      rmn = std::max(rmn, max_abs(Eigen::VectorXd(a_minus_closed(h.m, x).a -
                                                  tw.projector_A(h, x, Side::minus).a)));
    }
    add_check(s, "closed triangular adjoint", rad, 1e-12);
    add_check(s, "closed A+ projector", rp, 1e-12);
    add_check(s, "closed A- projector", rmn, 1e-12);
  }

  // A+ + A- resolves the identity.
  {
    double r = 0;
    for (int level = 0; level <= 2; ++level)
      for (int n = 0; n < 10; ++n) {
        GroupElement h = rand_group(rng, tw, level, 0.6);
        AlgebraElement x = rand_element(rng, tw.lv(level).alg);
        r = std::max(r, max_abs(Eigen::VectorXd(tw.projector_A(h, x, Side::plus).a +
                                                tw.projector_A(h, x, Side::minus).a - x.a)));
      }
    add_check(s, "A+ + A- = id", r, 1e-12);
  }

  // The minus component of Ad_{h+^-1} x- is pinned by the cross pairing:
  // k(minus part, e_j) = k(x-, Ad_{h+} e_j) for every plus basis vector e_j.
  {
    double r = 0;
    for (int level = 0; level <= 1; ++level) {
      const Tower::Level& L = tw.lv(level);
      const auto& pidx = L.split.plus_idx;
      const auto& midx = L.split.minus_idx;
      const int np = static_cast<int>(pidx.size());
      const int nm = static_cast<int>(midx.size());
      Eigen::MatrixXd A(nm, np);
      for (int i = 0; i < nm; ++i)
        for (int j = 0; j < np; ++j) A(i, j) = L.form.m(midx[i], pidx[j]);
      for (int n = 0; n < 10; ++n) {
        GroupElement hp = rand_plus_group(rng, tw, level);
        AlgebraElement xm = rand_side_element(rng, tw, level, Side::minus);
        AlgebraElement lhs = tw.adjoint(tw.inverse(hp), xm);
        Eigen::VectorXd rhs(np);
        for (int j = 0; j < np; ++j)
          rhs(j) = pair_form(L.form, xm, tw.adjoint(hp, basis_element(L.alg, pidx[j])));
        Eigen::VectorXd w = A.transpose().fullPivLu().solve(rhs);
        AlgebraElement rebuilt = project(L.split, lhs, Side::plus);
        for (int i = 0; i < nm; ++i) rebuilt.a(midx[i]) = w(i);
        r = std::max(r, max_abs(Eigen::VectorXd(rebuilt.a - lhs.a)));
      }
    }
    add_check(s, "cross pairing pins the transported minus component", r, 1e-10);
  }

  // Tangent flattenings against finite differences; flatten round trips.
  {
    double rbt = 0, rrt = 0, rflat = 0;
    const double h = 1e-5;
    for (int level = 0; level <= 2; ++level)
      for (int n = 0; n < 8; ++n) {
        GroupElement g = rand_group(rng, tw, level, 0.6);
        AlgebraElement x = rand_element(rng, tw.lv(level).alg);
        Eigen::VectorXd fp = tw.flatten(tw.mul(g, tw.exp(x, h)));
        Eigen::VectorXd fm = tw.flatten(tw.mul(g, tw.exp(x, -h)));
        rbt = std::max(rbt, max_abs(Eigen::VectorXd((fp - fm) / (2 * h) -
                                                    tw.flatten_body_tangent(g, x))));
        Eigen::VectorXd gp = tw.flatten(tw.mul(tw.exp(x, h), g));
        Eigen::VectorXd gm = tw.flatten(tw.mul(tw.exp(x, -h), g));
        rrt = std::max(rrt, max_abs(Eigen::VectorXd((gp - gm) / (2 * h) -
                                                    tw.flatten_right_tangent(g, x))));
        Eigen::VectorXd v = rand_vector(rng, Tower::flat_size(level));
        rflat = std::max(rflat, max_abs(Eigen::VectorXd(tw.flatten(tw.unflatten(level, v)) - v)));
      }
    add_check(s, "left-invariant tangents vs finite differences", rbt, 1e-7);
    add_check(s, "right-invariant tangents vs finite differences", rrt, 1e-7);
    add_check(s, "flatten/unflatten round trip", rflat, 0.0);
  }

  // Reprojection fixes exact members.
  {
    double r = 0;
    for (int n = 0; n < 10; ++n) {
      GroupElement hp = rand_plus_group(rng, tw, 1);
      r = std::max(r, max_abs(Eigen::VectorXd(
                          tw.flatten(tw.reproject(hp, Reproject::plus_group)) - tw.flatten(hp))));
      GroupElement hm = rand_minus_group(rng, tw, 1);
      r = std::max(r, max_abs(Eigen::VectorXd(
                          tw.flatten(tw.reproject(hm, Reproject::minus_group)) - tw.flatten(hm))));
    }
    add_check(s, "reprojection fixes exact members", r, 1e-12);
  }

  return s;
}

// ---------------------------------------------------------------------------
// Suite: brackets (canonical, Dirac, magnetic, Poisson-Lie, dressing, momenta)

inline Suite verify_brackets(const Tower& tw, uint64_t seed) {
  Suite s{"brackets", {}};
  Rng rng(seed);
  const int al = 1;
  const Tower::Level& L = tw.lv(al);

  // Canonical bracket: antisymmetry, the fiber-linear oracle, group-only
  // observables, and agreement with the symplectic pairing of the fields.
  {
    double rant = 0, rlin = 0, rgrp = 0, romg = 0;
    for (int n = 0; n < 10; ++n) {
      FiberDraw fd = rand_fiber_point(rng, tw, al);
      AlgebraElement u = rand_element(rng, L.alg);
      AlgebraElement v = rand_element(rng, L.alg);
      Observable F = linear_z_observable(tw, al, u);
      Observable G = linear_z_observable(tw, al, v);
      double fg = canonical_poisson(tw, al, F, G, fd.p);
      rant = std::max(rant, std::abs(fg + canonical_poisson(tw, al, G, F, fd.p)));
      rlin = std::max(rlin, std::abs(fg + (L.sigma * fd.p.Z.a).dot(bracket(u, v).a)));

      Eigen::VectorXd w1 = rand_vector(rng, Tower::flat_size(al));
      Eigen::VectorXd w2 = rand_vector(rng, Tower::flat_size(al));
      const Tower* tp = &tw;
      Observable A = make_observable(tw, al, [tp, w1](const PhasePoint& q) {
        return w1.dot(tp->flatten(q.h));
      });
      Observable B = make_observable(tw, al, [tp, w2](const PhasePoint& q) {
        return w2.dot(tp->flatten(q.h));
      });
      rgrp = std::max(rgrp, std::abs(canonical_poisson(tw, al, A, B, fd.p)));

      auto [uF, zF] = canonical_field(tw, al, F, fd.p);
      auto [uA, zA] = canonical_field(tw, al, A, fd.p);
      romg = std::max(romg, std::abs(canonical_poisson(tw, al, F, A, fd.p) -
                                     omega_eval(tw, al, fd.p, uF, zF, uA, zA)));
    }
    add_check(s, "canonical bracket antisymmetry", rant, 1e-12);
    add_check(s, "canonical bracket of fiber-linear pairs", rlin, 1e-12);
    add_check(s, "group-only observables commute", rgrp, 0.0);
    add_check(s, "bracket equals the symplectic pairing of the fields", romg, 1e-10);
  }

  // Dirac bracket: antisymmetry, Jacobi, and the Lie-Poisson limit.
  {
    double rant = 0, rjac = 0, rlp = 0;
    for (int n = 0; n < 20; ++n) {
      FiberDraw fd = rand_fiber_point(rng, tw, al);
      Observable F = linear_z_observable(tw, al, rand_element(rng, L.alg));
      Observable G = linear_z_observable(tw, al, rand_element(rng, L.alg));
      Observable H = linear_z_observable(tw, al, rand_element(rng, L.alg));
      rant = std::max(rant, std::abs(dirac_bracket(tw, al, F, G, fd.p, &fd.base) +
                                     dirac_bracket(tw, al, G, F, fd.p, &fd.base)));
      // Richardson-improved differentials keep the finite-difference noise of
      // the inner brackets well below the identity being measured.
      auto pair_obs = [&](const Observable& X, const Observable& Y) {
        const Tower* tp = &tw;
        auto ev = [tp, al, X, Y](const PhasePoint& q) {
          return dirac_bracket(*tp, al, X, Y, q);
        };
        Observable o;
        o.eval = ev;
        o.differential = [tp, al, ev](const PhasePoint& q) {
          Differential dh = fd_differential(*tp, al, ev, q, 1e-4);
          Differential dh2 = fd_differential(*tp, al, ev, q, 5e-5);
          return Differential{(4.0 * dh2.dF - dh.dF) / 3.0,
                              (4.0 * dh2.deltaF - dh.deltaF) / 3.0};
        };
        return o;
      };
      double cyc = dirac_bracket(tw, al, F, pair_obs(G, H), fd.p) +
                   dirac_bracket(tw, al, G, pair_obs(H, F), fd.p) +
                   dirac_bracket(tw, al, H, pair_obs(F, G), fd.p);
      rjac = std::max(rjac, std::abs(cyc));
    }
    for (int n = 0; n < 10; ++n) {
      // Trivial fiber: h- = e, z- = 0.
      FiberBasePoint base = make_base_point(tw, tw.identity(al), zero_element(L.alg));
      PhasePoint p{rand_plus_group(rng, tw, al), rand_side_element(rng, tw, al, Side::plus)};
      AlgebraElement u = rand_element(rng, L.alg);
      AlgebraElement v = rand_element(rng, L.alg);
      Observable F = linear_z_observable(tw, al, u);
      Observable G = linear_z_observable(tw, al, v);
      rlp = std::max(rlp, std::abs(dirac_bracket(tw, al, F, G, p, &base) -
                                   lie_poisson_value(tw, al, p.Z, L.sigma * u.a, L.sigma * v.a)));
    }
    add_check(s, "dirac bracket antisymmetry", rant, 1e-12);
    add_check(s, "dirac jacobi identity (cyclic sum, 20 fiber points)", rjac, 1e-6);
    add_check(s, "dirac bracket over the trivial fiber is lie-poisson", rlp, 1e-10);
  }

  // Level-0 magnetic picture.
  {
    const Sl2cModel& md = tw.model();
    double rfast = 0;
    for (int n = 0; n < 20; ++n) {
      GroupElement hm = rand_minus_group(rng, tw, 0);
      FiberBasePoint base = make_base_point(tw, hm, zero_element(md.alg));
      Eigen::Vector3d z3 = rand_vec3(rng);
      Eigen::Vector3d w1 = rand_vec3(rng), w2 = rand_vec3(rng);
      PhasePoint p{tw.mul(rand_plus_group(rng, tw, 0), hm), su2_element(tw, z3)};
      Eigen::VectorXd d1 = Eigen::VectorXd::Zero(6), d2 = Eigen::VectorXd::Zero(6);
      d1.head(3) = w1;
      d2.head(3) = w2;
      Observable F = linear_z_observable(tw, 0, element(md.alg, md.sigma_inv * d1));
      Observable G = linear_z_observable(tw, 0, element(md.alg, md.sigma_inv * d2));
      rfast = std::max(rfast, std::abs(dirac_bracket(tw, 0, F, G, p, &base) -
                                       dirac_fast_sl2c(hm.m, z3, w1, w2)));
    }
    add_check(s, "level-0 fast path of the dirac bracket", rfast, 1e-8);

    double rsym = 0, rtr = 0, rdens = 0;
    for (int n = 0; n < 50; ++n) {
      GroupElement hm = rand_minus_group(rng, tw, 0);
      Eigen::Matrix3d M = magnetic_jacobian(hm.m);
      rsym = std::max(rsym, max_abs(Eigen::MatrixXd(M - M.transpose())));
      rtr = std::max(rtr, std::abs(M.trace() - monopole_density(hm.m)));
      rdens = std::max(rdens, std::abs(monopole_density(hm.m) - monopole_density_trace(hm.m)));
    }
    add_check(s, "magnetic jacobian symmetry", rsym, 0.0);
    add_check(s, "divergence equals the monopole density", rtr, 1e-12);
    add_check(s, "monopole density vs the trace form (50 draws)", rdens, 1e-12);

    // Dyadic spot values.
    Mat2c hs1;
    hs1 << 2.0, 0.0, 0.0, 0.5;
    Mat2c hs2;
    hs2 << 1.0, cplx(1.0, 0.0), 0.0, 1.0;
    double rspot = std::abs(monopole_density(hs1) - 15.0 / 16.0);
    rspot = std::max(rspot, std::abs(magnetic_jacobian(hs1).trace() - 15.0 / 16.0));
    rspot = std::max(rspot, std::abs(monopole_density(hs2) - (-1.0)));
    Eigen::Vector3d bf = magnetic_field(hs2, Eigen::Vector3d(0, 0, 1));
    rspot = std::max(rspot, (bf - Eigen::Vector3d(1, 0, -1)).cwiseAbs().maxCoeff());
    add_check(s, "monopole density and field spot values", rspot, 0.0);
  }

  // Poisson-Lie bivector of the plus group.
  {
    double ragree = 0, rant = 0;
    for (int n = 0; n < 100; ++n) {
      PhasePoint p{rand_plus_group(rng, tw, al), rand_side_element(rng, tw, al, Side::plus)};
      AlgebraElement xi = rand_side_element(rng, tw, al + 1, Side::minus);
      AlgebraElement eta = rand_side_element(rng, tw, al + 1, Side::minus);
      double d = pl_bivector_defining(tw, al, p, xi, eta);
      ragree = std::max(ragree, std::abs(d - pl_bivector_block(tw, al, p, xi, eta)));
      rant = std::max(rant, std::abs(d + pl_bivector_defining(tw, al, p, eta, xi)));
    }
    add_check(s, "bivector forms agree (100 draws)", ragree, 1e-10);
    add_check(s, "bivector antisymmetry", rant, 1e-12);
    PhasePoint pe{tw.identity(al), zero_element(L.alg)};
    AlgebraElement xi = rand_side_element(rng, tw, al + 1, Side::minus);
    AlgebraElement eta = rand_side_element(rng, tw, al + 1, Side::minus);
    add_check(s, "bivector vanishes at the unit",
              std::max(std::abs(pl_bivector_defining(tw, al, pe, xi, eta)),
                       std::abs(pl_bivector_block(tw, al, pe, xi, eta))),
              0.0);
  }

  // Dressing fields: formulas against flow derivatives, the fixed point at the
  // unit, and the (anti)representation property measured by mixed differences.
  {
    double rdr = 0, rrec = 0;
    for (int n = 0; n < 20; ++n) {
      PhasePoint p{rand_plus_group(rng, tw, al), rand_side_element(rng, tw, al, Side::plus)};
      AlgebraElement xi = rand_side_element(rng, tw, al + 1, Side::minus);
      auto [u, zd] = dressing_vector(tw, al, xi, p);
      Eigen::VectorXd fd = flow_tangent_fd(
          tw, [&](double t) { return dressing_flow(tw, xi, p, t); }, 1e-6);
      rdr = std::max(rdr, max_abs(Eigen::VectorXd(fd - phase_tangent(tw, p, u, zd))));

      PhasePoint q{rand_minus_group(rng, tw, al), rand_side_element(rng, tw, al, Side::minus)};
      AlgebraElement zeta = rand_side_element(rng, tw, al + 1, Side::plus);
      auto [ur, zr] = reciprocal_dressing(tw, al, zeta, q);
      Eigen::VectorXd fdr = flow_tangent_fd(
          tw, [&](double t) { return reciprocal_flow(tw, zeta, q, t); }, 1e-6);
      rrec = std::max(rrec, max_abs(Eigen::VectorXd(fdr - phase_tangent(tw, q, ur, zr))));
    }
    add_check(s, "dressing formula vs the flow derivative", rdr, 1e-5);
    add_check(s, "reciprocal dressing formula vs the flow derivative", rrec, 1e-5);

    PhasePoint pe{tw.identity(al), zero_element(L.alg)};
    AlgebraElement xi0 = rand_side_element(rng, tw, al + 1, Side::minus);
    auto [u0, z0] = dressing_vector(tw, al, xi0, pe);
    add_check(s, "dressing fixes the unit fiber", std::max(max_abs(u0.a), max_abs(z0.a)), 0.0);

    // [V_xi, V_eta] from composed exact flows by a mixed second difference.
    auto flow_commutator = [&](const std::function<PhasePoint(const PhasePoint&, double)>& fa,
                               const std::function<PhasePoint(const PhasePoint&, double)>& fb,
                               const PhasePoint& p, double h) {
      auto F = [&](double a, double b) { return phase_flatten(tw, fb(fa(p, a), b)); };
      auto G = [&](double a, double b) { return phase_flatten(tw, fa(fb(p, b), a)); };
      Eigen::VectorXd mf = (F(h, h) - F(h, -h) - F(-h, h) + F(-h, -h)) / (4 * h * h);
      Eigen::VectorXd mg = (G(h, h) - G(h, -h) - G(-h, h) + G(-h, -h)) / (4 * h * h);
      return Eigen::VectorXd(mf - mg);
    };
    double ranti = 0, rrep = 0;
    for (int n = 0; n < 20; ++n) {
      PhasePoint p{rand_plus_group(rng, tw, al, /*scale=*/0.5),
                   rand_side_element(rng, tw, al, Side::plus)};
      AlgebraElement xi = rand_side_element(rng, tw, al + 1, Side::minus);
      AlgebraElement eta = rand_side_element(rng, tw, al + 1, Side::minus);
      Eigen::VectorXd comm = flow_commutator(
          [&](const PhasePoint& q, double t) { return dressing_flow(tw, xi, q, t); },
          [&](const PhasePoint& q, double t) { return dressing_flow(tw, eta, q, t); }, p, 1e-5);
      auto [ub, zb] = dressing_vector(tw, al, bracket(xi, eta), p);
      ranti = std::max(ranti, max_abs(Eigen::VectorXd(comm + phase_tangent(tw, p, ub, zb))));

      PhasePoint q{rand_minus_group(rng, tw, al, /*scale=*/0.5),
                   rand_side_element(rng, tw, al, Side::minus)};
      AlgebraElement za = rand_side_element(rng, tw, al + 1, Side::plus);
      AlgebraElement zb2 = rand_side_element(rng, tw, al + 1, Side::plus);
      Eigen::VectorXd commr = flow_commutator(
          [&](const PhasePoint& w, double t) { return reciprocal_flow(tw, za, w, t); },
          [&](const PhasePoint& w, double t) { return reciprocal_flow(tw, zb2, w, t); }, q, 1e-5);
      auto [ur, zr] = reciprocal_dressing(tw, al, bracket(za, zb2), q);
      rrep = std::max(rrep, max_abs(Eigen::VectorXd(commr - phase_tangent(tw, q, ur, zr))));
    }
    add_check(s, "dressing fields antirepresent the minus algebra", ranti, 1e-4);
    add_check(s, "reciprocal fields represent the plus algebra", rrep, 1e-4);
  }

  // Momentum maps.
  {
    double re = 0, rphi = 0;
    for (int n = 0; n < 10; ++n) {
      AlgebraElement z = rand_element(rng, L.alg);
      PhasePoint pe{tw.identity(al), z};
      re = std::max(re, max_abs(Eigen::VectorXd(phi_B(tw, al, pe).a - L.sigma * z.a)));
      AlgebraElement x = rand_element(rng, L.alg);
      rphi = std::max(rphi, std::abs(phi_X(tw, al, pe, x) - (L.sigma * z.a).dot(x.a)));
    }
    add_check(s, "momentum map at the unit", std::max(re, rphi), 1e-13);

    double req = 0;
    for (int n = 0; n < 20; ++n) {
      FiberDraw fd = rand_fiber_point(rng, tw, al);
      GroupElement g = rand_group(rng, tw, al, 0.6);
      // Phi_B(g^-1 h, Z) = Ad*_g Phi_B(h, Z); left translation keeps Z.
      PhasePoint moved{tw.mul(tw.inverse(g), fd.p.h), fd.p.Z};
      CoalgebraElement lhs = phi_B(tw, al, moved);
      CoalgebraElement rhs = tw.coadjoint(g, phi_B(tw, al, fd.p));
      req = std::max(req, max_abs(Eigen::VectorXd(lhs.a - rhs.a)));
    }
    add_check(s, "momentum map equivariance", req, 1e-10);

    double rdiff = 0;
    for (int n = 0; n < 5; ++n) {
      FiberDraw fd = rand_fiber_point(rng, tw, al);
      AlgebraElement x = rand_element(rng, L.alg);
      Observable phi = phi_X_observable(tw, al, x);
      Differential ex = phi.differential(fd.p);
      Differential nu = fd_differential(tw, al, phi.eval, fd.p);
      rdiff = std::max(rdiff, std::max(max_abs(Eigen::VectorXd(ex.dF - nu.dF)),
                                       max_abs(Eigen::VectorXd(ex.deltaF - nu.deltaF))));
    }
    add_check(s, "momentum observable differential", rdiff, 1e-8);

    double rdef = 0, rchar = 0;
    for (int n = 0; n < 10; ++n) {
      FiberDraw fd = rand_fiber_point(rng, tw, al);
      AlgebraElement x = rand_element(rng, L.alg);
      AlgebraElement y = rand_element(rng, L.alg);
      Observable px = phi_X_observable(tw, al, x);
      Observable py = phi_X_observable(tw, al, y);
      double defect = dirac_bracket(tw, al, px, py, fd.p) -
                      phi_X(tw, al, fd.p, bracket(x, y));
      rdef = std::max(rdef, std::abs(defect - momentum_bracket_correction(tw, al, fd.p, x, y)));

      // On a character fiber the correction vanishes: sigma z- on the H lines.
      Eigen::VectorXd zc = Eigen::VectorXd::Zero(L.alg->dim);
      zc(iH) = rand_real(rng);
      zc(6 + iH) = rand_real(rng);
      AlgebraElement zm = element(L.alg, L.sigma_inv * zc);
      FiberBasePoint cb = make_base_point(tw, fd.base.h_minus, zm);
      PhasePoint cp{fd.p.h, rand_side_element(rng, tw, al, Side::plus) + zm};
      double cdef = dirac_bracket(tw, al, px, py, cp, &cb) -
                    phi_X(tw, al, cp, bracket(x, y));
      rchar = std::max(rchar, std::abs(cdef));
    }
    add_check(s, "momentum bracket anomaly matches the correction", rdef, 1e-8);
    add_check(s, "the anomaly vanishes over character fibers", rchar, 1e-8);

    double rth = 0;
    for (int n = 0; n < 10; ++n) {
      PhasePoint p{rand_plus_group(rng, tw, al), rand_side_element(rng, tw, al, Side::plus)};
      CoalgebraElement th = theta_plus(tw, al, p);
      for (int i : L.split.plus_idx) rth = std::max(rth, std::abs(th.a(i)));
    }
    add_check(s, "theta is supported on the minus duals", rth, 1e-12);
  }

  return s;
}

// ---------------------------------------------------------------------------
// Suite: dynamics (Legendre maps, collective motion, nested systems, RK4)

inline Suite verify_dynamics(const Tower& tw, uint64_t seed) {
  Suite s{"dynamics", {}};
  Rng rng(seed);
  const Tower::Level& L = tw.lv(1);
  Hamiltonian hq = make_quadratic_km(tw, 1);
  Hamiltonian h2 = make_sl2c_h2(tw);
  const Sl2cModel& md = tw.model();

  {
    double rdef = 0, req = 0, rvi = 0;
    for (int n = 0; n < 15; ++n) {
      CoalgebraElement eta{L.alg, rand_vector(rng, L.alg->dim)};
      AlgebraElement x = rand_element(rng, L.alg);
      GroupElement g = rand_group(rng, tw, 1, 0.6);
      for (const Hamiltonian* h : {&hq, &h2}) {
        rdef = std::max(rdef, legendre_residual(tw, *h, eta, x));
        req = std::max(req, legendre_equivariance_residual(tw, *h, g, eta));
        rvi = std::max(rvi, value_invariance_residual(tw, *h, g, eta));
      }
    }
    add_check(s, "legendre maps match the value derivative", rdef, 1e-8);
    add_check(s, "legendre equivariance", req, 1e-8);
    add_check(s, "hamiltonian coadjoint invariance", rvi, 1e-8);
  }

  // Change of variables between the fiber and the twisted orbit.
  {
    double rrt = 0, rom = 0;
    for (int n = 0; n < 15; ++n) {
      FiberDraw fd = rand_fiber_point(rng, tw, 1);
      AlgebraElement z = rand_element(rng, L.alg);
      auto [om0, gamma] = to_omega_gamma(tw, h2, fd.base, z);
      rrt = std::max(rrt, max_abs(Eigen::VectorXd(from_gamma(tw, h2, fd.base, gamma).a - z.a)));
      rom = std::max(rom, max_abs(Eigen::VectorXd(omega_of_gamma(tw, h2, gamma).a - om0.a)));
    }
    add_check(s, "omega-gamma change of variables round trip", rrt, 1e-12);
    add_check(s, "omega agrees through both variable sets", rom, 1e-12);
  }

  // Collective field: the fiber constraint is exact, and the Dirac field of
  // the collective observable reproduces it.
  {
    double rz = 0, rdir = 0, rdb = 0;
    Observable ham_obs = collective_observable(tw, h2);
    for (int n = 0; n < 10; ++n) {
      FiberDraw fd = rand_fiber_point(rng, tw, 1);
      auto [xi, zdot] = collective_rhs(tw, h2, fd.base, fd.p.Z);
      rz = std::max(rz, max_abs(project(L.split, zdot, Side::minus).a));
      auto [u, zdotD] = dirac_field(tw, 1, ham_obs, fd.p, &fd.base);
      rdir = std::max(rdir, max_abs(Eigen::VectorXd(tw.adjoint(fd.base.h_minus, u).a - xi.a)));
      rdir = std::max(rdir, max_abs(Eigen::VectorXd(zdotD.a - zdot.a)));
      Observable F = linear_z_observable(tw, 1, rand_element(rng, L.alg));
      Differential df = F.differential(fd.p);
      double along = df.dF.dot(u.a) + df.deltaF.dot(zdotD.a);
      rdb = std::max(rdb, std::abs(along - dirac_bracket(tw, 1, F, ham_obs, fd.p, &fd.base)));
    }
    add_check(s, "collective fiber velocity stays on the fiber", rz, 0.0);
    add_check(s, "dirac field of the energy matches the collective field", rdir, 1e-10);
    add_check(s, "directional derivative matches the dirac bracket", rdb, 1e-6);
  }

  // The three Gammadot forms on the character locus, and the quadratic
  // identities off it.
  {
    double r3 = 0;
    for (int n = 0; n < 15; ++n) {
      AlgebraElement h1 = rand_real(rng) * basis_element(md.alg, iX3) +
                          rand_side_element(rng, tw, 0, Side::minus);
      AlgebraElement t1 = rand_real(rng) * basis_element(md.alg, iX3) +
                          rand_side_element(rng, tw, 0, Side::minus);
      AlgebraElement gq = tw.pair_join(h1, t1);
      AlgebraElement gb = tw.pair_join(rand_side_element(rng, tw, 0, Side::minus),
                                       rand_side_element(rng, tw, 0, Side::minus));
      for (const auto& [ham, gamma] :
           {std::pair<const Hamiltonian*, const AlgebraElement*>{&hq, &gq},
            std::pair<const Hamiltonian*, const AlgebraElement*>{&h2, &gb}}) {
        AlgebraElement d0 = omega_gamma_rhs(tw, *ham, *gamma, GammaForm::projected_plus).second;
        AlgebraElement d1 = omega_gamma_rhs(tw, *ham, *gamma, GammaForm::projected_minus).second;
        AlgebraElement d2 = omega_gamma_rhs(tw, *ham, *gamma, GammaForm::full_minus).second;
        r3 = std::max(r3, max_abs(Eigen::VectorXd(d0.a - d1.a)));
        r3 = std::max(r3, max_abs(Eigen::VectorXd(d0.a - d2.a)));
      }
    }
    add_check(s, "gammadot forms agree on the character locus", r3, 1e-10);

    double rq = 0;
    for (int n = 0; n < 15; ++n) {
      AlgebraElement gamma = rand_element(rng, L.alg);
      AlgebraElement d0 = omega_gamma_rhs(tw, hq, gamma, GammaForm::projected_plus).second;
      AlgebraElement d1 = omega_gamma_rhs(tw, hq, gamma, GammaForm::projected_minus).second;
      rq = std::max(rq, max_abs(Eigen::VectorXd(d0.a - d1.a)));
    }
    add_check(s, "quadratic projected forms agree everywhere", rq, 1e-13);

    double rf = 0;
    for (int n = 0; n < 10; ++n) {
      AlgebraElement gamma = tw.pair_join(rand_side_element(rng, tw, 0, Side::minus),
                                          rand_side_element(rng, tw, 0, Side::minus));
      auto [op, gdot] = omega_gamma_rhs(tw, hq, gamma, GammaForm::projected_plus);
      rf = std::max(rf, std::max(max_abs(op.a), max_abs(gdot.a)));
    }
    add_check(s, "minus-side omega freezes the projected flow", rf, 0.0);
  }

  // Nested level-down systems.
  {
    double rpu0 = 0, rpu = 0, rproj = 0, rrhs = 0, rdress = 0;
    const Tower::Level& L0 = tw.lv(0);
    for (int n = 0; n < 10; ++n) {
      const bool zero_r = n % 2 == 0;
      AlgebraElement r_minus = zero_r ? zero_element(L0.alg)
                                      : rand_side_element(rng, tw, 0, Side::minus);
      AlgebraElement head = rand_element(rng, L0.alg);
      AlgebraElement tail = rand_element(rng, L0.alg);
      auto [h2_, t2_] = nested_unpack(tw, nested_pack(tw, head, tail, r_minus), r_minus);
      double rt = std::max(max_abs(Eigen::VectorXd(h2_.a - head.a)),
                           max_abs(Eigen::VectorXd(t2_.a - tail.a)));
      (zero_r ? rpu0 : rpu) = std::max(zero_r ? rpu0 : rpu, rt);

      GroupElement gm = rand_minus_group(rng, tw, 1);
      AlgebraElement gamma0 = rand_element(rng, L.alg);
      NestedSample ns = nested_projection(tw, gm, gamma0, r_minus);
      AlgebraElement packed = nested_pack(tw, ns.gamma_t, ns.m_t, r_minus);
      rproj = std::max(rproj, max_abs(Eigen::VectorXd(packed.a - tw.adjoint(gm, gamma0).a)));

      NestedState st{rand_plus_group(rng, tw, 0), rand_side_element(rng, tw, 0, Side::plus),
                     ns.gamma_t, ns.m_t};
      NestedDerivative nd = nested_rhs(tw, hq, st, r_minus);
      auto [op, gdot] = omega_gamma_rhs(tw, hq, packed, GammaForm::projected_plus);
      AlgebraElement gdot_want = nested_pack(tw, nd.gammadot, nd.mdot, r_minus);
      rrhs = std::max(rrhs, max_abs(Eigen::VectorXd(gdot.a - gdot_want.a)));
      AlgebraElement op_want =
          tw.pair_join(nd.xi, bracket(nd.xi, st.z_plus) + nd.zdot);
      rrhs = std::max(rrhs, max_abs(Eigen::VectorXd(op.a - op_want.a)));

      AlgebraElement viaDress = dressing_component(
          L0.split, project(L0.split, ns.gamma_t, Side::minus), nd.xi, Side::minus);
      rdress = std::max(rdress, max_abs(Eigen::VectorXd(viaDress.a - nd.gammadot.a)));
    }
    add_check(s, "nested pack/unpack inverse (r = 0)", rpu0, 0.0);
    add_check(s, "nested pack/unpack inverse", rpu, 1e-14);
    add_check(s, "nested projection repacks the twisted orbit", rproj, 1e-12);
    add_check(s, "nested system matches the packed flow", rrhs, 1e-12);
    add_check(s, "nested gammadot is the dressing component", rdress, 0.0);
  }

  // RK4: measured convergence order on a linear system with a closed solution.
  {
    Eigen::Matrix3d A;
    A << 0, 1, 0, -1, 0, 0, 0, 0, 0.5;
    Eigen::Vector3d x0(1.0, 0.5, -0.25);
    auto reference = [&](double t) {
      Eigen::Vector3d r;
      r(0) = std::cos(t) * x0(0) + std::sin(t) * x0(1);
      r(1) = -std::sin(t) * x0(0) + std::cos(t) * x0(1);
      r(2) = std::exp(0.5 * t) * x0(2);
      return r;
    };
    Rhs rhs = [&A](double, const Eigen::VectorXd& y) { return Eigen::VectorXd(A * y); };
    auto err = [&](double dt) {
      Trajectory t = integrate(rhs, x0, 0.0, 2.0, dt, nullptr);
      return max_abs(Eigen::VectorXd(t.states.back() - reference(2.0)));
    };
    double e1 = err(1e-2), e2 = err(5e-3), e3 = err(2.5e-3);
    double order = std::min(std::log2(e1 / e2), std::log2(e2 / e3));
    std::ostringstream name;
    name << "rk4 convergence order on a linear system (measured " << std::fixed
         << std::setprecision(3) << order << ")";
    add_check(s, name.str(), std::max(0.0, 3.9 - order), 0.0);
  }

  // Integration behavior: determinism, frozen states, non-finite aborts.
  {
    AlgebraElement gamma0 = tw.pair_join(su2_element(tw, rand_unit3(rng)),
                                         su2_element(tw, rand_vec3(rng)));
    Trajectory t1 = simulate_omega_gamma(tw, h2, tw.identity(1), gamma0,
                                         GammaForm::full_minus, 0.0, 0.05, 1e-3);
    Trajectory t2 = simulate_omega_gamma(tw, h2, tw.identity(1), gamma0,
                                         GammaForm::full_minus, 0.0, 0.05, 1e-3);
    double rdet = 0;
    for (size_t i = 0; i < t1.states.size(); ++i)
      rdet = std::max(rdet, max_abs(Eigen::VectorXd(t1.states[i] - t2.states[i])));
    add_check(s, "integration is deterministic", rdet, 0.0);

    Rhs zero = [](double, const Eigen::VectorXd& y) {
      return Eigen::VectorXd(Eigen::VectorXd::Zero(y.size()));
    };
    Trajectory tz = integrate(zero, rand_vector(rng, 5), 0.0, 1.0, 0.1, nullptr);
    double rz = 0;
    for (const auto& st : tz.states) rz = std::max(rz, max_abs(Eigen::VectorXd(st - tz.states[0])));
    add_check(s, "a zero field freezes the state", rz, 0.0);

    Rhs bad = [](double t, const Eigen::VectorXd& y) {
      Eigen::VectorXd d = Eigen::VectorXd::Zero(y.size());
      if (t >= 0.2) d(0) = std::numeric_limits<double>::quiet_NaN();
      return d;
    };
    double raborts = 1.0;
    try {
      integrate(bad, Eigen::VectorXd::Zero(2), 0.0, 1.0, 0.1, nullptr);
    } catch (const std::runtime_error&) {
      raborts = 0.0;
    }
    add_check(s, "non-finite states abort integration", raborts, 0.0);
  }

  // Short RK4 runs: invariants in both coordinate systems, and the exact
  // conservation of the minus block in phase coordinates.
  {
    AlgebraElement gamma0 = tw.pair_join(su2_element(tw, rand_unit3(rng)),
                                         su2_element(tw, rand_vec3(rng)));
    Trajectory tr = simulate_omega_gamma(tw, h2, tw.identity(1), gamma0,
                                         GammaForm::full_minus, 0.0, 0.5, 1e-3);
    attach_invariants(tw, h2, nullptr, tr);
    add_check(s, "theta drift on an rk4 collective run", invariant_max(tr, "theta_drift"), 1e-7);
    add_check(s, "energy drift on an rk4 collective run", invariant_drift(tr, "energy"), 1e-6);
    add_check(s, "gamma commutes with omega along the run",
              invariant_max(tr, "commutator_norm"), 1e-10);

    // Seed the fiber with plus-slot data plus an H-slot minus component.
    // Theta tracking needs the character condition: sigma(Z) restricted to
    // the minus factor must kill its commutators, and the H slots span that
    // character space. Off this locus the collective flow only follows the
    // projected Gammadot form and theta is genuinely not constant.
    GroupElement hm = rand_minus_group(rng, tw, 1, 0.5);
    AlgebraElement z0p = tw.pair_join(su2_element(tw, rand_unit3(rng)),
                                      su2_element(tw, rand_vec3(rng)));
    z0p.a(iH) += rand_real(rng);
    z0p.a(6 + iH) += rand_real(rng);
    FiberBasePoint base = make_base_point(tw, hm, project(L.split, z0p, Side::minus));
    Trajectory tp = simulate_phase(tw, h2, base, tw.identity(1), z0p, 0.0, 0.5, 1e-3);
    attach_invariants(tw, h2, &base, tp);
    add_check(s, "theta drift on an rk4 phase run", invariant_max(tp, "theta_drift"), 1e-7);
    add_check(s, "energy drift on an rk4 phase run", invariant_drift(tp, "energy"), 1e-6);
    double rmb = 0;
    const int gs = Tower::flat_size(1);
    for (const auto& st : tp.states) {
      Eigen::VectorXd zmin = st.segment(gs, L.alg->dim) - tp.states[0].segment(gs, L.alg->dim);
      for (int i : L.split.minus_idx) rmb = std::max(rmb, std::abs(zmin(i)));
    }
    add_check(s, "phase flow conserves the minus block exactly", rmb, 0.0);
  }

  // Theta is annihilated along admissible directions: central differences of
  // the invariant along solution curves.
  {
    double r = 0;
    const double eps = 1e-3;
    for (int n = 0; n < 20; ++n) {
      // Moderate norms: conjugation by far-out minus factors amplifies the
      // plain roundoff of theta beyond any finite-difference signal.
      AlgebraElement gamma0 = n % 2 == 0
                                  ? tw.pair_join(su2_element(tw, rand_unit3(rng)),
                                                 su2_element(tw, rand_vec3(rng)))
                                  : rand_element(rng, L.alg, 0.35);
      AksData data = make_aks_data(tw, h2, gamma0);
      double t = rand_real(rng, -1.5, 1.5);
      auto theta_at = [&](double tt) {
        GroupElement k = tw.exp(data.theta0, tt);
        AlgebraElement gamma = tw.adjoint(tw.factorize(k).second, gamma0);
        return theta_map(tw, h2, k, gamma);
      };
      r = std::max(r, max_abs(Eigen::VectorXd(
                          (theta_at(t + eps).a - theta_at(t - eps).a) / (2 * eps))));
    }
    add_check(s, "theta is constant along the flow direction", r, 1e-8);
  }

  return s;
}

// ---------------------------------------------------------------------------
// Suite: aks (closed factorization curves, conservation, nested solves)

inline Suite verify_aks(const Tower& tw, uint64_t seed) {
  Suite s{"aks", {}};
  Rng rng(seed);
  const Tower::Level& L = tw.lv(1);
  Hamiltonian h2 = make_sl2c_h2(tw);
  Hamiltonian hq = make_quadratic_km(tw, 1);

  // Closed-form curve and factors against the series/LLT path.
  {
    double rk = 0, rp = 0, rm = 0;
    for (int n = 0; n < 50; ++n) {
      Eigen::Vector3d a = rand_unit3(rng);
      Eigen::Vector3d y = rand_vec3(rng);
      double t = rand_real(rng, -2, 2);
      AlgebraElement gamma0 = tw.pair_join(su2_element(tw, a), su2_element(tw, y));
      AksData data = make_aks_data(tw, h2, gamma0);
      GroupElement k = tw.exp(data.theta0, t);
      auto [hp, gm] = tw.factorize(k);
      Sl2cFactorization cf = sl2c_closed_form(tw, a, y, t);
      rk = std::max(rk, max_abs(Eigen::VectorXd(tw.flatten(cf.k1) - tw.flatten(k))));
      rp = std::max(rp, max_abs(Eigen::VectorXd(tw.flatten(cf.plus1) - tw.flatten(hp))));
      rm = std::max(rm, max_abs(Eigen::VectorXd(tw.flatten(cf.minus1) - tw.flatten(gm))));
    }
    add_check(s, "closed curve matches the series exponential (50 draws)", rk, 1e-10);
    add_check(s, "closed plus factor matches the factorization", rp, 1e-10);
    add_check(s, "closed minus factor matches the factorization", rm, 1e-10);
  }

  // Non-unit data reduces to unit data by rescaling time.
  {
    double r = 0;
    for (int n = 0; n < 10; ++n) {
      Eigen::Vector3d a = rand_unit3(rng);
      double lam = rand_real(rng, 0.3, 1.8);
      Eigen::Vector3d y = rand_vec3(rng);
      double t = rand_real(rng, -1.5, 1.5);
      AlgebraElement gamma0 = tw.pair_join(su2_element(tw, Eigen::Vector3d(lam * a)),
                                           su2_element(tw, y));
      GroupElement k = tw.exp(make_aks_data(tw, h2, gamma0).theta0, t);
      Sl2cFactorization cf = sl2c_closed_form(tw, a, Eigen::Vector3d(y / lam), lam * t);
      r = std::max(r, max_abs(Eigen::VectorXd(tw.flatten(cf.k1) - tw.flatten(k))));
    }
    add_check(s, "time rescaling reduces to unit data", r, 1e-10);
  }

  // Iterated cross products and ad powers against their closed forms.
  {
    double ric = 0, rad = 0;
    for (int n = 1; n <= 8; ++n)
      for (int k = 0; k < 10; ++k) {
        Eigen::Vector3d x = rand_vec3(rng), y = rand_vec3(rng);
        Eigen::Vector3d dir = iterated_cross_direct(x, y, n);
        ric = std::max(ric, (iterated_cross_closed(x, y, n) - dir).cwiseAbs().maxCoeff() /
                                (1.0 + dir.cwiseAbs().maxCoeff()));
        Eigen::Vector3d a = rand_unit3(rng);
        AlgebraElement pd = ad_power_direct(tw, a, y, n);
        AlgebraElement pc = ad_power_closed(tw, a, y, n);
        rad = std::max(rad, max_abs(Eigen::VectorXd(pc.a - pd.a)) / (1.0 + max_abs(pd.a)));
      }
    add_check(s, "iterated cross products match the closed form (n <= 8)", ric, 1e-12);
    add_check(s, "ad powers match the closed form (n <= 8)", rad, 1e-12);
    AlgebraElement spot = ad_power_direct(tw, Eigen::Vector3d(0, 0, 1),
                                          Eigen::Vector3d(1, 0, 0), 2);
    add_check(s, "(ad X3)^2 X1 = -4 X1",
              max_abs(Eigen::VectorXd(spot.a + 4.0 * basis_element(tw.lv(0).alg, iX1).a)), 0.0);
  }

  // The invariant map at distinguished points.
  {
    double rid = 0, rq = 0;
    for (int n = 0; n < 10; ++n) {
      AlgebraElement gamma = rand_element(rng, L.alg);
      rid = std::max(rid, max_abs(Eigen::VectorXd(theta_map(tw, h2, tw.identity(1), gamma).a -
                                                  omega_of_gamma(tw, h2, gamma).a)));
      GroupElement k = rand_group(rng, tw, 1, 0.6);
      AlgebraElement ref = tw.adjoint(tw.inverse(tw.factorize(k).second), gamma);
      rq = std::max(rq, max_abs(Eigen::VectorXd(theta_map(tw, hq, k, gamma).a - ref.a)));
    }
    add_check(s, "theta at the unit", rid, 1e-13);
    add_check(s, "quadratic theta is the twisted gamma", rq, 1e-12);
  }

  // Conservation along the factorized solution.
  {
    AlgebraElement gamma0 = tw.pair_join(su2_element(tw, rand_unit3(rng)),
                                         su2_element(tw, rand_vec3(rng)));
    AksData data = make_aks_data(tw, h2, gamma0);
    Trajectory tr = solve_by_factorization(tw, h2, data, 0.0, 2.0, 201);
    attach_invariants(tw, h2, nullptr, tr);
    add_check(s, "theta constant along the factorized solution",
              invariant_max(tr, "theta_drift"), 1e-12);
    add_check(s, "energy constant along the factorized solution",
              invariant_drift(tr, "energy"), 1e-8);
    add_check(s, "gamma commutes with omega along the solution",
              invariant_max(tr, "commutator_norm"), 1e-10);

    double rp = 0, rm = 0;
    for (double t : {-1.4, -0.5, 0.3, 0.9, 1.6}) {
      FactorVelocityResidual fv = factor_velocity_residual(tw, h2, data, t);
      rp = std::max(rp, fv.plus);
      rm = std::max(rm, fv.minus);
    }
    add_check(s, "plus factor velocity", rp, 1e-6);
    add_check(s, "minus factor velocity", rm, 1e-6);

    // The sampled Gamma curve satisfies the evolution equation. Grid spacing
    // 1e-3; the five-point stencil keeps the truncation below the signal.
    Trajectory fine = solve_by_factorization(tw, h2, data, 0.0, 0.2, 201);
    double rres = 0;
    const int gs = Tower::flat_size(1);
    const int d = L.alg->dim;
    auto gseg = [&](size_t j) { return Eigen::VectorXd(fine.states[j].segment(gs, d)); };
    for (size_t i = 2; i + 2 < fine.states.size(); i += 10) {
      Eigen::VectorXd fd =
          (-gseg(i + 2) + 8.0 * gseg(i + 1) - 8.0 * gseg(i - 1) + gseg(i - 2)) / (12.0 * 1e-3);
      AlgebraElement g0_ = element(L.alg, gseg(i));
      rres = std::max(rres, max_abs(Eigen::VectorXd(
                                fd - omega_gamma_rhs(tw, h2, g0_, GammaForm::full_minus).second.a)));
    }
    add_check(s, "sampled curve satisfies the gammadot equation", rres, 1e-6);
  }

  // Degenerate flows.
  {
    Hamiltonian hz = make_zero(tw, 1);
    AlgebraElement gamma0 = rand_element(rng, L.alg);
    Trajectory tr = solve_by_factorization(tw, hz, make_aks_data(tw, hz, gamma0), 0.0, 1.0, 11);
    double r = 0;
    for (const auto& st : tr.states) r = std::max(r, max_abs(Eigen::VectorXd(st - tr.states[0])));
    add_check(s, "zero hamiltonian freezes the solution", r, 0.0);

    AksData dm{1, rand_element(rng, L.alg), rand_side_element(rng, tw, 1, Side::minus)};
    double rpl = 0;
    for (double t : {-1.0, 0.5, 1.4}) {
      GroupElement k = tw.exp(dm.theta0, t);
      auto [hp, gm] = tw.factorize(k);
      rpl = std::max(rpl, max_abs(Eigen::VectorXd(tw.flatten(hp) - tw.flatten(tw.identity(1)))));
      rpl = std::max(rpl, max_abs(Eigen::VectorXd(tw.flatten(gm) - tw.flatten(k))));
    }
    add_check(s, "minus-side theta keeps the plus factor at the unit", rpl, 1e-12);
  }

  // Quadratic flows at levels 1 and 2 keep Omega = Gamma.
  {
    double rog = 0;
    for (int m = 1; m <= 2; ++m) {
      Hamiltonian hm = make_quadratic_km(tw, m);
      AlgebraElement gamma0 = rand_element(rng, tw.lv(m).alg, 0.7);
      AksData dd = make_aks_data(tw, hm, gamma0);
      for (double t : {0.3, 1.1}) {
        GroupElement k = tw.exp(dd.theta0, t);
        AlgebraElement gm_ = tw.adjoint(tw.factorize(k).second, gamma0);
        rog = std::max(rog, max_abs(Eigen::VectorXd(omega_of_gamma(tw, hm, gm_).a - gm_.a)));
      }
    }
    add_check(s, "quadratic flows keep omega = gamma", rog, 1e-12);
  }

  // The level-down projection of a tower solution obeys the nested equations.
  {
    const Tower::Level& L0 = tw.lv(0);
    AlgebraElement head = rand_real(rng) * basis_element(L0.alg, iX3) +
                          rand_side_element(rng, tw, 0, Side::minus);
    AlgebraElement tail = rand_real(rng) * basis_element(L0.alg, iX3) +
                          rand_side_element(rng, tw, 0, Side::minus);
    AlgebraElement gamma0 = tw.pair_join(head, tail);
    AksData data = make_aks_data(tw, hq, gamma0);
    const double dt = 1e-3;
    Trajectory tr = solve_by_factorization(tw, hq, data, 0.0, 0.2, 201);
    const int gs = Tower::flat_size(1);
    double rfd = 0;
    for (const AlgebraElement& r_minus :
         {zero_element(L0.alg), rand_side_element(rng, tw, 0, Side::minus)}) {
      for (size_t i = 1; i + 1 < tr.states.size(); i += 20) {
        auto at = [&](size_t j) {
          GroupElement gm = tw.unflatten(1, Eigen::VectorXd(tr.states[j].tail(gs)));
          GroupElement hp = tw.unflatten(1, Eigen::VectorXd(tr.states[j].head(gs)));
          return std::pair<NestedSample, GroupElement>(
              nested_projection(tw, gm, gamma0, r_minus), hp);
        };
        auto [nsm, hpm] = at(i - 1);
        auto [ns0, hp0] = at(i);
        auto [nsp, hpp] = at(i + 1);
        NestedState st{*hp0.base, hp0.fiber, ns0.gamma_t, ns0.m_t};
        NestedDerivative nd = nested_rhs(tw, hq, st, r_minus);
        rfd = std::max(rfd, max_abs(Eigen::VectorXd(
                                (nsp.gamma_t.a - nsm.gamma_t.a) / (2 * dt) - nd.gammadot.a)));
        rfd = std::max(rfd, max_abs(Eigen::VectorXd(
                                (nsp.m_t.a - nsm.m_t.a) / (2 * dt) - nd.mdot.a)));
        rfd = std::max(rfd, max_abs(Eigen::VectorXd(
                                (hpp.fiber.a - hpm.fiber.a) / (2 * dt) - nd.zdot.a)));
        rfd = std::max(rfd, max_abs(Eigen::VectorXd(
                                (tw.flatten(*hpp.base) - tw.flatten(*hpm.base)) / (2 * dt) -
                                tw.flatten_body_tangent(*hp0.base, nd.xi))));
      }
    }
    add_check(s, "projected tower solution obeys the nested equations", rfd, 1e-6);
  }

  return s;
}

// ---------------------------------------------------------------------------
// Descriptor-level verification (used by the CLI on external descriptor files)

inline std::string worst_triple(const LieAlgebra& alg, const std::array<int, 3>& w) {
  if (w[0] < 0 || w[0] >= alg.dim || w[1] >= alg.dim || w[2] >= alg.dim) return "";
  return " (worst triple " + alg.labels[w[0]] + ", " + alg.labels[w[1]] + ", " +
         alg.labels[w[2]] + ")";
}

inline Suite verify_descriptor(const Descriptor& d) {
  Suite s{"descriptor", {}};
  CheckResult a = check_antisymmetry(d.alg);
  add_check(s, a.pass ? "bracket antisymmetry"
                      : "bracket antisymmetry" + worst_triple(*d.alg, a.worst),
            a.max_residual, 1e-12);
  CheckResult j = check_jacobi(d.alg);
  add_check(s, j.pass ? "jacobi identity" : "jacobi identity" + worst_triple(*d.alg, j.worst),
            j.max_residual, 1e-12);
  add_check(s, "pairing symmetry", max_abs(Eigen::MatrixXd(d.form.m - d.form.m.transpose())),
            1e-12);
  if (d.form.ad_invariant)
    add_check(s, "pairing ad-invariance", ad_invariance_residual(d.form), 1e-12);
  add_check(s, "splitting isotropy", isotropy_residual(d.form, d.split), 1e-12);
  add_check(s, "plus closure", closure_residual(d.split, Side::plus), 1e-12);
  add_check(s, "minus closure", closure_residual(d.split, Side::minus), 1e-12);
  return s;
}

// ---------------------------------------------------------------------------
// Suite dispatch

inline Suite run_suite(const Tower& tw, const std::string& name, uint64_t seed) {
  if (name == "algebra") return verify_algebra(tw, seed);
  if (name == "groups") return verify_groups(tw, seed);
  if (name == "brackets") return verify_brackets(tw, seed);
  if (name == "dynamics") return verify_dynamics(tw, seed);
  if (name == "aks") return verify_aks(tw, seed);
  throw std::invalid_argument("run_suite: unknown suite '" + name + "'");
}

inline std::vector<Suite> run_verification(const Tower& tw, const std::string& which,
                                           uint64_t seed) {
  std::vector<std::string> names;
  if (which == "all")
    names = {"algebra", "groups", "brackets", "dynamics", "aks"};
  else
    names = {which};
  std::vector<Suite> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(run_suite(tw, n, seed));
  return out;
}

inline void write_report(std::ostream& os, const Suite& s) {
  os << "suite " << s.name << "\n";
  for (const Check& c : s.checks)
    os << "  [" << (c.pass ? "PASS" : "FAIL") << "] " << c.name << "  residual " << c.residual
       << "  tol " << c.tol << "\n";
  os << "  " << (s.pass() ? "ok" : "FAILED") << "\n";
}

}  // namespace aks
