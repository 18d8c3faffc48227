#include <catch2/catch_amalgamated.hpp>

#include "aks/aks.hpp"

using namespace aks;

namespace {

double mgap(const Mat2c& a, const Mat2c& b) { return (a - b).cwiseAbs().maxCoeff(); }

double egap(const AlgebraElement& x, const AlgebraElement& y) {
  return (x.a - y.a).cwiseAbs().maxCoeff();
}

Mat2c m2(cplx a, cplx b, cplx c, cplx d) {
  Mat2c m;
  m << a, b, c, d;
  return m;
}

double group_gap(const Tower& tw, const GroupElement& a, const GroupElement& b) {
  return (tw.flatten(a) - tw.flatten(b)).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("iwasawa factorization spot values") {
  const Sl2cModel md = build_sl2c();

  auto [u0, b0] = iwasawa_factorize(Mat2c::Identity());
  CHECK(mgap(u0, Mat2c::Identity()) < 1e-14);
  CHECK(mgap(b0, Mat2c::Identity()) < 1e-14);

  const double s2 = std::sqrt(2.0);
  auto [u1, b1] = iwasawa_factorize(m2(1, 0, 1, 1));
  CHECK(mgap(u1, m2(1 / s2, -1 / s2, 1 / s2, 1 / s2)) < 1e-12);
  CHECK(mgap(b1, m2(s2, 1 / s2, 0, 1 / s2)) < 1e-12);

  for (double t : {0.3, 1.7, -0.9}) {
    auto [u, b] = iwasawa_factorize(exp_i_su2(md, Eigen::Vector3d(0, 0, 1), t / 2));
    CHECK(mgap(u, Mat2c::Identity()) < 1e-12);
    CHECK(mgap(b, m2(std::exp(-t / 2), 0, 0, std::exp(t / 2))) < 1e-12);
  }

  // special unitary input passes through untouched
  std::mt19937_64 rng(31);
  Mat2c g = exp_su2(md, rand_unit3(rng), 0.9);
  auto [u2, b2] = iwasawa_factorize(g);
  CHECK(mgap(u2, g) < 1e-12);
  CHECK(mgap(b2, Mat2c::Identity()) < 1e-12);

  CHECK_THROWS_AS(iwasawa_factorize(m2(2, 0, 0, 1)), std::invalid_argument);

  // the determinant gate is relative, large unimodular matrices pass
  Mat2c big = m2(1e3, 0, 5, 1e-3);
  auto [u3, b3] = iwasawa_factorize(big);
  CHECK(mgap(Mat2c(u3 * b3), big) < 1e-9 * big.norm());
}

TEST_CASE("iwasawa round trips") {
  Tower tw(0);
  std::mt19937_64 rng(37);
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    Mat2c g = rand_group(rng, tw, 0).m;
    auto [u, b] = iwasawa_factorize(g);
    worst = std::max(worst, mgap(Mat2c(u * b), g));
    worst = std::max(worst, mgap(Mat2c(u.adjoint() * u), Mat2c::Identity()));
    CHECK(std::abs(b(1, 0)) == 0.0);
    CHECK(b(0, 0).imag() == 0.0);
    CHECK(b(0, 0).real() > 0.0);
    CHECK(b(1, 1).real() > 0.0);
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("closed exponentials of the unitary directions") {
  const Sl2cModel md = build_sl2c();
  std::mt19937_64 rng(41);

  CHECK(mgap(exp_matrix(Mat2c::Zero()), Mat2c::Identity()) == 0.0);

  const double t = 0.8;
  CHECK(mgap(exp_i_su2(md, Eigen::Vector3d(0, 0, 1), t / 2),
             m2(std::exp(-t / 2), 0, 0, std::exp(t / 2))) < 1e-13);
  CHECK(mgap(exp_i_su2(md, Eigen::Vector3d(1, 0, 0), t / 2),
             m2(std::cosh(t / 2), -std::sinh(t / 2), -std::sinh(t / 2), std::cosh(t / 2))) <
        1e-13);

  Eigen::Vector3d a = rand_vec3(rng);
  Eigen::VectorXd c6 = Eigen::VectorXd::Zero(6);
  c6.head(3) = a;
  CHECK(mgap(exp_su2(md, a, 1.0), exp_matrix(md.realize(c6))) < 1e-12);
  CHECK(mgap(exp_i_su2(md, a, 1.0), exp_matrix(Mat2c(cplx(0, 1) * md.realize(c6)))) < 1e-12);

  Mat2c H = m2(1, 0, 0, -1);
  CHECK(mgap(exp_matrix(Mat2c(0.7 * H)), m2(std::exp(0.7), 0, 0, std::exp(-0.7))) < 1e-13);
}

TEST_CASE("group laws at every level") {
  Tower tw(2);
  std::mt19937_64 rng(43);
  for (int m = 0; m <= 2; ++m) {
    GroupElement a = rand_group(rng, tw, m);
    GroupElement b = rand_group(rng, tw, m);
    GroupElement c = rand_group(rng, tw, m);
    CHECK(group_gap(tw, tw.mul(tw.mul(a, b), c), tw.mul(a, tw.mul(b, c))) < 1e-12);
    CHECK(group_gap(tw, tw.mul(a, tw.inverse(a)), tw.identity(m)) < 1e-12);
    CHECK(group_gap(tw, tw.mul(tw.identity(m), a), a) < 1e-13);
  }
}

TEST_CASE("exponential on the tower") {
  Tower tw(2);
  std::mt19937_64 rng(47);

  for (int m = 0; m <= 2; ++m) {
    CHECK(group_gap(tw, tw.exp(zero_element(tw.lv(m).alg), 0.7), tw.identity(m)) == 0.0);
    AlgebraElement x = rand_element(rng, tw.lv(m).alg, 0.6);
    GroupElement lhs = tw.exp(x, 0.9);
    GroupElement rhs = tw.mul(tw.exp(x, 0.5), tw.exp(x, 0.4));
    CHECK(group_gap(tw, lhs, rhs) < 1e-10);
    CHECK(group_gap(tw, tw.inverse(tw.exp(x, 0.9)), tw.exp(x, -0.9)) < 1e-10);
  }
}

TEST_CASE("level-1 exponential fiber closed form") {
  Tower tw(1);
  const Sl2cModel& md = tw.model();
  std::mt19937_64 rng(53);
  Eigen::Vector3d xv = rand_unit3(rng);
  Eigen::Vector3d yv = rand_unit3(rng);
  AlgebraElement X = su2_element(tw, xv);
  AlgebraElement Y = su2_element(tw, yv);
  const double dot = xv.dot(yv);
  const double t = 0.9, u = 2.0 * t;

  // compact direction: the fiber series closes with sin and cos
  {
    GroupElement g = tw.exp(tw.pair_join(X, Y), t);
    AlgebraElement want =
        t * Y + ((u - std::sin(u)) / 2.0) * (dot * X - Y) + (-(1.0 - std::cos(u)) / 4.0) * bracket(X, Y);
    CHECK(egap(g.fiber, want) < 1e-10);
    CHECK(mgap(g.base->m, exp_matrix(Mat2c(t * md.realize(X)))) < 1e-12);
  }

  // i times the same direction: sinh and cosh, with the bracket term rotated
  {
    AlgebraElement jX = md.j_multiply(X);
    GroupElement g = tw.exp(tw.pair_join(jX, Y), t);
    AlgebraElement want = t * Y + (-(std::sinh(u) - u) / 2.0) * (dot * X - Y) +
                          (-(std::cosh(u) - 1.0) / 4.0) * md.j_multiply(bracket(X, Y));
    CHECK(egap(g.fiber, want) < 1e-10);
  }
}

TEST_CASE("adjoint action") {
  Tower tw(1);
  std::mt19937_64 rng(59);
  AlgebraPtr alg0 = tw.lv(0).alg;

  AlgebraElement e = basis_element(alg0, iE);
  CHECK(egap(tw.adjoint(tw.identity(0), e), e) == 0.0);

  // Ad_{diag(a, 1/a)} scales the nilpotent directions by a^2
  GroupElement d = g0(m2(2, 0, 0, 0.5));
  CHECK(egap(tw.adjoint(d, e), 4.0 * e) == 0.0);
  CHECK(egap(tw.adjoint(d, basis_element(alg0, iIE)), 4.0 * basis_element(alg0, iIE)) == 0.0);
  CHECK(egap(tw.adjoint(d, basis_element(alg0, iX3)), basis_element(alg0, iX3)) == 0.0);

  for (int m = 0; m <= 1; ++m) {
    GroupElement g = rand_group(rng, tw, m);
    AlgebraElement x = rand_element(rng, tw.lv(m).alg, 0.8);
    AlgebraElement y = rand_element(rng, tw.lv(m).alg, 0.8);

    CHECK(egap(tw.adjoint(g, bracket(x, y)), bracket(tw.adjoint(g, x), tw.adjoint(g, y))) < 1e-10);
    CHECK(std::abs(pair_form(tw.lv(m).form, tw.adjoint(g, x), tw.adjoint(g, y)) -
                   pair_form(tw.lv(m).form, x, y)) < 1e-10);
    CHECK(egap(tw.adjoint(tw.inverse(g), tw.adjoint(g, x)), x) < 1e-11);

    CoalgebraElement xi{tw.lv(m).alg, rand_element(rng, tw.lv(m).alg, 1.0).a};
    CHECK(std::abs(pair_dual(tw.coadjoint(g, xi), x) - pair_dual(xi, tw.adjoint(g, x))) < 1e-12);
  }
}

TEST_CASE("triangular adjoint closed forms") {
  Tower tw(0);
  std::mt19937_64 rng(61);
  const Splitting& sp = tw.lv(0).split;

  for (int rep = 0; rep < 50; ++rep) {
    GroupElement h = rand_minus_group(rng, tw, 0);
    AlgebraElement x = rand_element(rng, tw.lv(0).alg, 1.0);
    CHECK(egap(adjoint_b_closed(h.m, x), tw.adjoint(h, x)) < 1e-12);
    CHECK(egap(a_plus_closed(h.m, x), tw.projector_A(h, x, Side::plus)) < 1e-12);
    CHECK(egap(a_minus_closed(h.m, x), tw.projector_A(h, x, Side::minus)) < 1e-12);

    AlgebraElement sum = tw.projector_A(h, x, Side::plus) + tw.projector_A(h, x, Side::minus);
    CHECK(egap(sum, x) < 1e-12);
  }

  // frozen spot: h = [[a, b+ic], [0, 1/a]] acting on X3
  const double a = 1.7, b = -0.4, c = 0.8;
  GroupElement h = g0(m2(a, cplx(b, c), 0, 1 / a));
  AlgebraElement ap = tw.projector_A(h, basis_element(tw.lv(0).alg, iX3), Side::plus);
  CHECK(std::abs(ap.a(iH)) < 1e-13);
  CHECK(ap.a(iX3) == Catch::Approx(1.0).margin(1e-13));
  CHECK(ap.a(iE) == Catch::Approx(-2 * c / a).margin(1e-13));
  CHECK(ap.a(iIE) == Catch::Approx(2 * b / a).margin(1e-13));

  // projectors are idempotent along their own side
  GroupElement hp = rand_plus_group(rng, tw, 0);
  AlgebraElement x = rand_element(rng, tw.lv(0).alg, 1.0);
  AlgebraElement p1 = tw.projector_A(hp, x, Side::plus);
  CHECK(egap(tw.projector_A(hp, p1, Side::plus), p1) < 1e-12);
  AlgebraElement pm = project(sp, tw.adjoint(hp, p1), Side::minus);
  CHECK(pm.a.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("transported minus directions against the coadjoint") {
  Tower tw(1);
  std::mt19937_64 rng(67);

  for (int m = 0; m <= 1; ++m) {
    const Tower::Level& L = tw.lv(m);
    GroupElement hp = rand_plus_group(rng, tw, m);
    AlgebraElement xm = rand_side_element(rng, tw, m, Side::minus);

    AlgebraElement lhs = tw.adjoint(tw.inverse(hp), xm);
    AlgebraElement rhs = form_lower(L.form, tw.coadjoint(hp, form_raise(L.form, xm)));

    // the two transports differ by a plus-side dressing term only
    AlgebraElement diff = lhs - rhs;
    CHECK(project(L.split, diff, Side::minus).a.cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("factorization on the tower") {
  Tower tw(2);
  std::mt19937_64 rng(71);

  auto [ip, im] = tw.factorize(tw.identity(1));
  CHECK(group_gap(tw, ip, tw.identity(1)) == 0.0);
  CHECK(group_gap(tw, im, tw.identity(1)) == 0.0);

  for (int m = 0; m <= 2; ++m) {
    for (int rep = 0; rep < 20; ++rep) {
      GroupElement g = rand_group(rng, tw, m);
      auto [hp, gm] = tw.factorize(g);
      CHECK(tw.in_plus_group(hp, 1e-9));
      CHECK(tw.in_minus_group(gm, 1e-9));
      CHECK(group_gap(tw, tw.mul(hp, gm), g) < 1e-10);
    }
  }

  // a plus-group input factors as (itself, identity)
  GroupElement hp = rand_plus_group(rng, tw, 1);
  auto [p, q] = tw.factorize(hp);
  CHECK(group_gap(tw, p, hp) < 1e-12);
  CHECK(group_gap(tw, q, tw.identity(1)) < 1e-12);
}

TEST_CASE("flattening and reprojection") {
  Tower tw(3);
  std::mt19937_64 rng(73);

  for (int m = 0; m <= 3; ++m) {
    GroupElement g = rand_group(rng, tw, m);
    CHECK(group_gap(tw, tw.unflatten(m, tw.flatten(g)), g) == 0.0);
    CHECK(Tower::flat_size(m) == tw.flatten(g).size());
  }
  CHECK(Tower::flat_size(0) == 8);
  CHECK(Tower::flat_size(1) == 14);
  CHECK(Tower::flat_size(2) == 26);

  GroupElement hp = rand_plus_group(rng, tw, 1);
  CHECK(group_gap(tw, tw.reproject(hp, Reproject::plus_group), hp) < 1e-12);
  GroupElement hm = rand_minus_group(rng, tw, 1);
  CHECK(group_gap(tw, tw.reproject(hm, Reproject::minus_group), hm) < 1e-12);

  // full-group reprojection restores the unit determinant
  GroupElement g = rand_group(rng, tw, 0);
  GroupElement off = g0(Mat2c(1.0001 * g.m));
  Mat2c fixed = tw.reproject(off, Reproject::full_group).m;
  CHECK(std::abs(fixed(0, 0) * fixed(1, 1) - fixed(0, 1) * fixed(1, 0) - cplx(1, 0)) < 1e-12);
}
