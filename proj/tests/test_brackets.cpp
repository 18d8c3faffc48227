#include <catch2/catch_amalgamated.hpp>

#include "aks/aks.hpp"

using namespace aks;

namespace {

Mat2c m2(cplx a, cplx b, cplx c, cplx d) {
  Mat2c m;
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST_CASE("canonical bracket of fiber-linear observables") {
  Tower tw(2);
  const int al = 1;
  const Tower::Level& L = tw.lv(al);
  std::mt19937_64 rng(101);

  for (int rep = 0; rep < 3; ++rep) {
    AlgebraElement u = rand_element(rng, L.alg);
    AlgebraElement v = rand_element(rng, L.alg);
    Observable F = linear_z_observable(tw, al, u);
    Observable G = linear_z_observable(tw, al, v);
    PhasePoint p{rand_group(rng, tw, al), rand_element(rng, L.alg)};

    double got = canonical_poisson(tw, al, F, G, p);
    double want = -(L.sigma * p.Z.a).dot(bracket(u, v).a);
    CHECK(got == Catch::Approx(want).margin(1e-12));
    CHECK(canonical_poisson(tw, al, G, F, p) == Catch::Approx(-got).margin(1e-12));
  }

  // observables of the group slot alone commute
  auto trF = make_observable(tw, al, [&tw](const PhasePoint& p) { return tw.flatten(p.h)(0); });
  auto trG = make_observable(tw, al, [&tw](const PhasePoint& p) { return tw.flatten(p.h)(3); });
  PhasePoint p{rand_group(rng, tw, al), rand_element(rng, L.alg)};
  CHECK(canonical_poisson(tw, al, trF, trG, p) == 0.0);
}

TEST_CASE("canonical field of a fiber-linear hamiltonian") {
  Tower tw(1);
  const int al = 1;
  const Tower::Level& L = tw.lv(al);
  std::mt19937_64 rng(103);

  AlgebraElement u = rand_element(rng, L.alg);
  Observable H = linear_z_observable(tw, al, u);
  PhasePoint p{rand_group(rng, tw, al), rand_element(rng, L.alg)};

  auto [body, zdot] = canonical_field(tw, al, H, p);
  CHECK((body.a - u.a).cwiseAbs().maxCoeff() < 1e-14);

  CoalgebraElement sz{L.alg, L.sigma * p.Z.a};
  Eigen::VectorXd want = L.sigma_inv * ad_star(u, sz).a;
  CHECK((zdot.a - want).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("register_observable validates the differential") {
  Tower tw(1);
  const int al = 0;
  std::mt19937_64 rng(107);
  const Tower::Level& L = tw.lv(al);

  auto eval = [](const PhasePoint& p) { return p.Z.a.squaredNorm(); };
  std::vector<PhasePoint> pts;
  for (int n = 0; n < 3; ++n)
    pts.push_back({rand_group(rng, tw, al), rand_element(rng, L.alg)});

  auto good = [&L](const PhasePoint& p) {
    return Differential{Eigen::VectorXd::Zero(L.alg->dim), 2.0 * p.Z.a};
  };
  auto bad = [&L](const PhasePoint&) {
    return Differential{Eigen::VectorXd::Zero(L.alg->dim), Eigen::VectorXd::Zero(L.alg->dim)};
  };

  CHECK_NOTHROW(register_observable(tw, al, eval, good, pts));
  CHECK_THROWS_AS(register_observable(tw, al, eval, bad, pts), std::invalid_argument);
}

TEST_CASE("dirac bracket basics") {
  Tower tw(2);
  const int al = 1;
  const Tower::Level& L = tw.lv(al);
  std::mt19937_64 rng(109);

  for (int rep = 0; rep < 5; ++rep) {
    FiberDraw fd = rand_fiber_point(rng, tw, al);
    Observable F = linear_z_observable(tw, al, rand_element(rng, L.alg));
    Observable G = linear_z_observable(tw, al, rand_element(rng, L.alg));
    double fg = dirac_bracket(tw, al, F, G, fd.p, &fd.base);
    double gf = dirac_bracket(tw, al, G, F, fd.p, &fd.base);
    CHECK(fg == Catch::Approx(-gf).margin(1e-12));
  }

  // over the trivial fiber the bracket collapses to lie-poisson
  FiberBasePoint triv = make_base_point(tw, tw.identity(al), zero_element(L.alg));
  for (int rep = 0; rep < 5; ++rep) {
    PhasePoint p{rand_plus_group(rng, tw, al), rand_side_element(rng, tw, al, Side::plus)};
    AlgebraElement u = rand_element(rng, L.alg);
    AlgebraElement v = rand_element(rng, L.alg);
    double got = dirac_bracket(tw, al, linear_z_observable(tw, al, u),
                               linear_z_observable(tw, al, v), p, &triv);
    double want = lie_poisson_value(tw, al, p.Z, L.sigma * u.a, L.sigma * v.a);
    CHECK(got == Catch::Approx(want).margin(1e-10));
  }

  // a point off the fiber is rejected
  FiberDraw fd = rand_fiber_point(rng, tw, al);
  PhasePoint off{rand_group(rng, tw, al), fd.p.Z};
  Observable F = linear_z_observable(tw, al, rand_element(rng, L.alg));
  CHECK_THROWS_AS(dirac_bracket(tw, al, F, F, off, &fd.base), std::invalid_argument);
}

TEST_CASE("the fiber bracket depends on the frozen minus data") {
  Tower tw(1);
  const Tower::Level& L = tw.lv(0);
  std::mt19937_64 rng(113);

  // translating the minus slot of Z moves linear brackets at rate
  // (sigma W-, [A+ u, A+ v]), which has no reason to vanish off the unit
  GroupElement hm = rand_minus_group(rng, tw, 0, 0.9);
  AlgebraElement u = basis_element(L.alg, iIE);
  AlgebraElement v = basis_element(L.alg, iX1);
  AlgebraElement w = basis_element(L.alg, iE);

  AlgebraElement au = tw.projector_A(hm, u, Side::plus);
  AlgebraElement av = tw.projector_A(hm, v, Side::plus);
  double rate = (L.sigma * w.a).dot(bracket(au, av).a);

  Observable F = linear_z_observable(tw, 0, u);
  Observable G = linear_z_observable(tw, 0, v);
  PhasePoint p{hm, rand_side_element(rng, tw, 0, Side::plus)};
  const double s = 1e-6;
  PhasePoint ps{hm, p.Z + s * w};
  double fd = (dirac_bracket(tw, 0, F, G, ps) - dirac_bracket(tw, 0, F, G, p)) / s;
  CHECK(fd == Catch::Approx(rate).margin(1e-6));

  // and at the unit the dependence is absent for these directions
  AlgebraElement pu = project(L.split, u, Side::plus);
  AlgebraElement pv = project(L.split, v, Side::plus);
  CHECK((L.sigma * w.a).dot(bracket(pu, pv).a) == 0.0);
}

TEST_CASE("magnetic picture spot values") {
  Tower tw(0);
  std::mt19937_64 rng(127);

  Mat2c hs1 = m2(2, 0, 0, 0.5);
  CHECK(monopole_density(hs1) == 15.0 / 16.0);
  CHECK(magnetic_jacobian(hs1).trace() == 15.0 / 16.0);

  Mat2c hs2 = m2(1, 1, 0, 1);
  CHECK(monopole_density(hs2) == -1.0);
  Eigen::Vector3d bf = magnetic_field(hs2, Eigen::Vector3d(0, 0, 1));
  CHECK((bf - Eigen::Vector3d(1, 0, -1)).cwiseAbs().maxCoeff() == 0.0);

  CHECK((magnetic_jacobian(Mat2c::Identity())).cwiseAbs().maxCoeff() == 0.0);

  for (int rep = 0; rep < 50; ++rep) {
    Mat2c hm = rand_minus_group(rng, tw, 0).m;
    Eigen::Matrix3d M = magnetic_jacobian(hm);
    CHECK((M - M.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(M.trace() == monopole_density(hm));
    CHECK(std::abs(monopole_density(hm) - monopole_density_trace(hm)) < 1e-12);
  }

  CHECK_THROWS_AS(monopole_density(m2(-1, 0, 0, -1)), std::invalid_argument);
  CHECK_THROWS_AS(magnetic_jacobian(m2(0, 1, -1, 0)), std::invalid_argument);
}

TEST_CASE("fast path of the level-0 dirac bracket") {
  Tower tw(0);
  const Sl2cModel& md = tw.model();
  std::mt19937_64 rng(131);

  for (int rep = 0; rep < 10; ++rep) {
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
    double got = dirac_bracket(tw, 0, F, G, p, &base);
    CHECK(got == Catch::Approx(dirac_fast_sl2c(hm.m, z3, w1, w2)).margin(1e-8));
  }

  // over the identity the field term drops out entirely
  Eigen::Vector3d z(0.4, -1.1, 0.6), a(1, 0, 0), b(0, 1, 0);
  CHECK(dirac_fast_sl2c(Mat2c::Identity(), z, a, b) ==
        Catch::Approx(-16.0 * a.cross(b).dot(z)).margin(1e-14));
}

TEST_CASE("poisson-lie bivector of the plus group") {
  Tower tw(2);
  const int al = 1;
  std::mt19937_64 rng(137);

  for (int rep = 0; rep < 30; ++rep) {
    PhasePoint p{rand_plus_group(rng, tw, al), rand_side_element(rng, tw, al, Side::plus)};
    AlgebraElement xi = rand_side_element(rng, tw, al + 1, Side::minus);
    AlgebraElement eta = rand_side_element(rng, tw, al + 1, Side::minus);

    double d = pl_bivector_defining(tw, al, p, xi, eta);
    CHECK(d == Catch::Approx(pl_bivector_block(tw, al, p, xi, eta)).margin(1e-10));
    CHECK(pl_bivector_defining(tw, al, p, eta, xi) == Catch::Approx(-d).margin(1e-11));
  }

  // the bivector vanishes at the unit
  PhasePoint unit{tw.identity(al), zero_element(tw.lv(al).alg)};
  AlgebraElement xi = rand_side_element(rng, tw, al + 1, Side::minus);
  AlgebraElement eta = rand_side_element(rng, tw, al + 1, Side::minus);
  CHECK(pl_bivector_defining(tw, al, unit, xi, eta) == 0.0);
  CHECK(pl_bivector_block(tw, al, unit, xi, eta) == 0.0);
}

TEST_CASE("dressing fields against their flows") {
  Tower tw(2);
  const int al = 1;
  std::mt19937_64 rng(139);

  for (int rep = 0; rep < 5; ++rep) {
    PhasePoint p{rand_plus_group(rng, tw, al), rand_side_element(rng, tw, al, Side::plus)};
    AlgebraElement xi = rand_side_element(rng, tw, al + 1, Side::minus);

    auto [u, zdot] = dressing_vector(tw, al, xi, p);
    Eigen::VectorXd want = phase_tangent(tw, p, u, zdot);
    Eigen::VectorXd got = flow_tangent_fd(
        tw, [&](double s) { return dressing_flow(tw, xi, p, s); });
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-5);
  }

  for (int rep = 0; rep < 5; ++rep) {
    PhasePoint p{rand_minus_group(rng, tw, al), rand_side_element(rng, tw, al, Side::minus)};
    AlgebraElement xi = rand_side_element(rng, tw, al + 1, Side::plus);

    auto [u, zdot] = reciprocal_dressing(tw, al, xi, p);
    Eigen::VectorXd want = phase_tangent(tw, p, u, zdot);
    Eigen::VectorXd got = flow_tangent_fd(
        tw, [&](double s) { return reciprocal_flow(tw, xi, p, s); });
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-5);
  }

  // the unit fiber is fixed, and the field is linear in the direction
  PhasePoint unit{tw.identity(al), zero_element(tw.lv(al).alg)};
  AlgebraElement xi = rand_side_element(rng, tw, al + 1, Side::minus);
  AlgebraElement eta = rand_side_element(rng, tw, al + 1, Side::minus);
  auto [u0, z0] = dressing_vector(tw, al, xi, unit);
  CHECK(u0.a.cwiseAbs().maxCoeff() == 0.0);
  CHECK(z0.a.cwiseAbs().maxCoeff() == 0.0);

  PhasePoint p{rand_plus_group(rng, tw, al), rand_side_element(rng, tw, al, Side::plus)};
  auto [ua, za] = dressing_vector(tw, al, xi, p);
  auto [ub, zb] = dressing_vector(tw, al, eta, p);
  auto [uc, zc] = dressing_vector(tw, al, 2.0 * xi + eta, p);
  CHECK((uc.a - 2.0 * ua.a - ub.a).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((zc.a - 2.0 * za.a - zb.a).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("momentum maps") {
  Tower tw(2);
  const int al = 1;
  const Tower::Level& L = tw.lv(al);
  std::mt19937_64 rng(149);

  // at the unit both maps reduce to the raw pairing data
  AlgebraElement z = rand_element(rng, L.alg);
  PhasePoint unit{tw.identity(al), z};
  CoalgebraElement phib = phi_B(tw, al, unit);
  CHECK((phib.a - L.sigma * z.a).cwiseAbs().maxCoeff() < 1e-13);

  AlgebraElement x = rand_element(rng, L.alg);
  CHECK(phi_X(tw, al, unit, x) == Catch::Approx((L.sigma * z.a).dot(x.a)).margin(1e-13));

  // equivariance under left translation
  for (int rep = 0; rep < 5; ++rep) {
    PhasePoint p{rand_group(rng, tw, al), rand_element(rng, L.alg)};
    GroupElement g = rand_group(rng, tw, al);
    PhasePoint q{tw.mul(tw.inverse(g), p.h), p.Z};
    CoalgebraElement lhs = phi_B(tw, al, q);
    CoalgebraElement rhs = tw.coadjoint(g, phi_B(tw, al, p));
    CHECK((lhs.a - rhs.a).cwiseAbs().maxCoeff() < 1e-10);
  }

  // the registered differential of phi_X survives the finite-difference gate
  std::vector<PhasePoint> pts;
  for (int n = 0; n < 3; ++n) pts.push_back({rand_group(rng, tw, al), rand_element(rng, L.alg)});
  Observable obs = phi_X_observable(tw, al, x);
  CHECK_NOTHROW(register_observable(tw, al, obs.eval, obs.differential, pts, 1e-7));

  // theta lives on the minus duals: the cross pairing sends its plus-side
  // lowering into minus coordinate slots, so the plus slots must vanish
  for (int rep = 0; rep < 5; ++rep) {
    PhasePoint p{rand_plus_group(rng, tw, al), rand_side_element(rng, tw, al, Side::plus)};
    CoalgebraElement th = theta_plus(tw, al, p);
    for (int i : L.split.plus_idx) CHECK(std::abs(th.a(i)) < 1e-12);
    AlgebraElement lowered = form_lower(L.form, th);
    CHECK(project(L.split, lowered, Side::minus).a.cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("momentum bracket anomaly") {
  Tower tw(2);
  const int al = 1;
  const Tower::Level& L = tw.lv(al);
  std::mt19937_64 rng(151);

  for (int rep = 0; rep < 5; ++rep) {
    FiberDraw fd = rand_fiber_point(rng, tw, al);
    AlgebraElement x = rand_element(rng, L.alg);
    AlgebraElement y = rand_element(rng, L.alg);

    double pb = dirac_bracket(tw, al, phi_X_observable(tw, al, x), phi_X_observable(tw, al, y),
                              fd.p, &fd.base);
    double anomaly = pb - phi_X(tw, al, fd.p, bracket(x, y));
    double corr = momentum_bracket_correction(tw, al, fd.p, x, y);
    CHECK(anomaly == Catch::Approx(corr).margin(1e-8));
  }

  // over a character fiber the anomaly dies
  std::vector<int> hslots = {5, 11};
  AlgebraElement zm = zero_element(L.alg);
  for (int i : hslots) zm.a(i) = rand_real(rng);
  CHECK(is_minus_character(tw, al, zm));
  GroupElement hm = rand_minus_group(rng, tw, al);
  FiberBasePoint base = make_base_point(tw, hm, zm);
  CHECK(base.character);
  PhasePoint p{tw.mul(rand_plus_group(rng, tw, al), hm),
               rand_side_element(rng, tw, al, Side::plus) + zm};
  AlgebraElement x = rand_element(rng, L.alg);
  AlgebraElement y = rand_element(rng, L.alg);
  double pb = dirac_bracket(tw, al, phi_X_observable(tw, al, x), phi_X_observable(tw, al, y), p,
                            &base);
  CHECK(pb - phi_X(tw, al, p, bracket(x, y)) == Catch::Approx(0.0).margin(1e-8));

  // a fiber with nilpotent support in the frozen slot is not a character
  AlgebraElement ze = zero_element(L.alg);
  ze.a(iE) = 0.7;
  CHECK_FALSE(is_minus_character(tw, al, ze));
}
