#pragma once

#include <cmath>
#include <memory>
#include <utility>

#include "sl2c.hpp"

namespace aks {

// ---------------------------------------------------------------------------
// Matrix-level pieces

// Unique factorization g = u b with u in SU(2) and b upper triangular with
// real positive diagonal, via the Cholesky factor of g* g.
inline std::pair<Mat2c, Mat2c> iwasawa_factorize(const Mat2c& g, double det_tol = 1e-8) {
  // Relative gate: det of a stored matrix cannot beat entry-scale^2 roundoff.
  if (std::abs(det2(g) - 1.0) > det_tol * std::max(1.0, g.squaredNorm()))
    throw std::invalid_argument("iwasawa_factorize: determinant is not 1");
  Eigen::LLT<Mat2c> llt(g.adjoint() * g);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("iwasawa_factorize: Cholesky factorization failed");
  Mat2c L = llt.matrixL();
  double d0 = L(0, 0).real(), d1 = L(1, 1).real();
  if (std::min(d0, d1) <= 1e-12 * std::max({d0, d1, 1.0}))
    throw std::runtime_error("iwasawa_factorize: numerically singular input");
  Mat2c b = L.adjoint();
  Mat2c binv = Mat2c::Zero();
  binv(0, 0) = 1.0 / b(0, 0);
  binv(1, 1) = 1.0 / b(1, 1);
  binv(0, 1) = -b(0, 1) / (b(0, 0) * b(1, 1));
  return {g * binv, b};
}

// Scaling-and-squaring Taylor exponential for traceless 2x2 complex matrices.
inline Mat2c exp_matrix(const Mat2c& m, double tol = 1e-14) {
  if (std::abs(m(0, 0) + m(1, 1)) > 1e-10 * (1.0 + m.norm()))
    throw std::invalid_argument("exp_matrix: matrix is not traceless");
  int s = 0;
  double nrm = m.norm();
  if (nrm > 0.5) s = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
  Mat2c t = m / std::pow(2.0, s);
  Mat2c acc = Mat2c::Identity();
  Mat2c term = Mat2c::Identity();
  for (int n = 1; n <= 30; ++n) {
    term = (term * t) / static_cast<double>(n);
    acc += term;
    if (term.norm() < tol) break;
  }
  for (int i = 0; i < s; ++i) acc = acc * acc;
  return acc;
}

// exp(tau * (a . X)) for a in R^3; the norm is absorbed into tau, so the
// closed trig form for unit su(2) directions applies.
inline Mat2c exp_su2(const Sl2cModel& md, const Eigen::Vector3d& a, double tau) {
  double n = a.norm();
  if (n == 0.0) return Mat2c::Identity();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(6);
  c.head(3) = a / n;
  Mat2c A = md.realize(c);
  return std::cos(tau * n) * Mat2c::Identity() + std::sin(tau * n) * A;
}

// exp(tau * i (a . X)): (i A)^2 = +1 for unit a, so cosh/sinh close the series.
inline Mat2c exp_i_su2(const Sl2cModel& md, const Eigen::Vector3d& a, double tau) {
  double n = a.norm();
  if (n == 0.0) return Mat2c::Identity();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(6);
  c.head(3) = a / n;
  Mat2c A = md.realize(c);
  return std::cosh(tau * n) * Mat2c::Identity() + std::sinh(tau * n) * (cplx(0.0, 1.0) * A);
}

inline void b_entries(const Mat2c& h, double& a, double& b, double& c, double tol = 1e-8) {
  if (!is_b_group(h, tol)) throw std::invalid_argument("b_entries: matrix is not in B");
  a = h(0, 0).real();
  b = h(0, 1).real();
  c = h(0, 1).imag();
}

// ---------------------------------------------------------------------------
// Recursive group elements: level 0 is a matrix, level m >= 1 is a pair
// (base in H_{m-1}, fiber in the level-(m-1) algebra).

struct GroupElement {
  int level = 0;
  Mat2c m = Mat2c::Identity();
  std::shared_ptr<const GroupElement> base;
  AlgebraElement fiber;
};

inline GroupElement g0(const Mat2c& m) {
  GroupElement g;
  g.level = 0;
  g.m = m;
  return g;
}

enum class Reproject { plus_group, minus_group, full_group };

class Tower {
 public:
  struct Level {
    AlgebraPtr alg;
    BilinearForm form;     // k_m; its matrix is the index map gamma_m
    Splitting split;
    Eigen::MatrixXd sigma;
    Eigen::MatrixXd sigma_inv;
  };

  explicit Tower(int max_level = 3) : md_(build_sl2c()) {
    levels_.push_back({md_.alg, md_.form, md_.split, md_.sigma, md_.sigma_inv});
    for (int m = 1; m <= max_level; ++m) {
      const Level& p = levels_.back();
      SemidirectLevel s = semidirect_sum(p.alg, p.form, p.split, /*half_factor=*/true);
      Eigen::MatrixXd sg = Eigen::MatrixXd::Zero(2 * p.alg->dim, 2 * p.alg->dim);
      sg.topLeftCorner(p.alg->dim, p.alg->dim) = 0.5 * p.sigma;
      sg.bottomRightCorner(p.alg->dim, p.alg->dim) = 0.5 * p.sigma;
      Eigen::MatrixXd sgi = Eigen::MatrixXd::Zero(2 * p.alg->dim, 2 * p.alg->dim);
      sgi.topLeftCorner(p.alg->dim, p.alg->dim) = 2.0 * p.sigma_inv;
      sgi.bottomRightCorner(p.alg->dim, p.alg->dim) = 2.0 * p.sigma_inv;
      levels_.push_back({s.alg, s.form, s.split, sg, sgi});
    }
  }

  const Sl2cModel& model() const { return md_; }
  int max_level() const { return static_cast<int>(levels_.size()) - 1; }
  const Level& lv(int m) const {
    if (m < 0 || m > max_level()) throw std::invalid_argument("Tower::lv: level out of range");
    return levels_[m];
  }

  // -- element constructors --------------------------------------------------

  GroupElement identity(int level) const {
    if (level == 0) return g0(Mat2c::Identity());
    GroupElement g;
    g.level = level;
    g.base = std::make_shared<GroupElement>(identity(level - 1));
    g.fiber = zero_element(lv(level - 1).alg);
    return g;
  }

  GroupElement gpair(const GroupElement& base, const AlgebraElement& fiber) const {
    require_same(fiber.alg, lv(base.level).alg, "Tower::gpair");
    GroupElement g;
    g.level = base.level + 1;
    g.base = std::make_shared<GroupElement>(base);
    g.fiber = fiber;
    return g;
  }

  std::pair<AlgebraElement, AlgebraElement> pair_split(const AlgebraElement& x) const {
    int m = x.alg->level;
    if (m < 1) throw std::invalid_argument("Tower::pair_split: level-0 element");
    const int d = lv(m - 1).alg->dim;
    return {element(lv(m - 1).alg, x.a.head(d)), element(lv(m - 1).alg, x.a.tail(d))};
  }

  AlgebraElement pair_join(const AlgebraElement& x, const AlgebraElement& y) const {
    require_same(x.alg, y.alg, "Tower::pair_join");
    int m = x.alg->level + 1;
    if (m > max_level()) throw std::invalid_argument("Tower::pair_join: level out of range");
    Eigen::VectorXd v(2 * x.alg->dim);
    v.head(x.alg->dim) = x.a;
    v.tail(x.alg->dim) = y.a;
    return element(lv(m).alg, std::move(v));
  }

  // -- group operations -------------------------------------------------------

  GroupElement mul(const GroupElement& a, const GroupElement& b) const {
    if (a.level != b.level) throw std::invalid_argument("Tower::mul: level mismatch");
    if (a.level == 0) return g0(Mat2c(a.m * b.m));
    // (a, X) (b, Y) = (a b, Ad_{b^-1} X + Y)
    GroupElement binv_base = inverse(*b.base);
    return gpair(mul(*a.base, *b.base), adjoint(binv_base, a.fiber) + b.fiber);
  }

  GroupElement inverse(const GroupElement& a) const {
    if (a.level == 0) {
      Mat2c inv;
      cplx d = det2(a.m);
      inv << a.m(1, 1) / d, -a.m(0, 1) / d, -a.m(1, 0) / d, a.m(0, 0) / d;
      return g0(inv);
    }
    return gpair(inverse(*a.base), -adjoint(*a.base, a.fiber));
  }

  AlgebraElement adjoint(const GroupElement& g, const AlgebraElement& x) const {
    require_same(x.alg, lv(g.level).alg, "Tower::adjoint");
    if (g.level == 0) {
      GroupElement gi = inverse(g);
      return md_.to_element(g.m * md_.realize(x) * gi.m, 1e-8);
    }
    // Ad_{(b,Z)}(X,Y) = (Ad_b X, Ad_b([Z,X] + Y))
    auto [X, Y] = pair_split(x);
    AlgebraElement first = adjoint(*g.base, X);
    AlgebraElement second = adjoint(*g.base, bracket(g.fiber, X) + Y);
    return pair_join(first, second);
  }

  Eigen::MatrixXd adjoint_matrix(const GroupElement& g) const {
    const int d = lv(g.level).alg->dim;
    Eigen::MatrixXd m(d, d);
    for (int j = 0; j < d; ++j) m.col(j) = adjoint(g, basis_element(lv(g.level).alg, j)).a;
    return m;
  }

  // <Ad*_g xi, x> = <xi, Ad_g x>
  CoalgebraElement coadjoint(const GroupElement& g, const CoalgebraElement& xi) const {
    require_same(xi.alg, lv(g.level).alg, "Tower::coadjoint");
    return {xi.alg, adjoint_matrix(g).transpose() * xi.a};
  }

  // -- exponential -------------------------------------------------------------

  GroupElement exp(const AlgebraElement& x, double t = 1.0) const {
    int m = x.alg->level;
    if (m == 0) return g0(exp_matrix(t * md_.realize(x)));
    // Exp(t(X,Y)) = (e^{tX}, -sum_{n>=1} ((-1)^n/n!) t^n ad_X^{n-1} Y)
    auto [X, Y] = pair_split(x);
    Eigen::MatrixXd adX = ad_matrix(X);
    Eigen::VectorXd term = t * Y.a;  // n = 1 term before sign
    Eigen::VectorXd fiber = term;    // (-1)^{n+1} factor = +1 at n = 1
    bool converged = term.cwiseAbs().maxCoeff() == 0.0;
    for (int n = 2; n <= 60 && !converged; ++n) {
      term = (t / static_cast<double>(n)) * (adX * term);
      fiber += (n % 2 == 0 ? -1.0 : 1.0) * term;
      converged = term.cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + fiber.cwiseAbs().maxCoeff());
    }
    if (!converged)
      throw std::runtime_error("Tower::exp: fiber series did not converge within 60 terms");
    return gpair(exp(X, t), element(X.alg, fiber));
  }

  // -- factorization g = g_plus g_minus ----------------------------------------

  std::pair<GroupElement, GroupElement> factorize(const GroupElement& g) const {
    if (g.level == 0) {
      auto [u, b] = iwasawa_factorize(g.m);
      return {g0(u), g0(b)};
    }
    auto [hp, hm] = factorize(*g.base);
    AlgebraElement w = adjoint(hm, g.fiber);
    const Splitting& sp = lv(g.level - 1).split;
    AlgebraElement wp = project(sp, w, Side::plus);
    AlgebraElement wm = project(sp, w, Side::minus);
    return {gpair(hp, wp), gpair(hm, adjoint(inverse(hm), wm))};
  }

  // A_side(h) = Ad_{h^-1} Pi_side Ad_h, for h in either factor subgroup.
  AlgebraElement projector_A(const GroupElement& h, const AlgebraElement& x, Side side) const {
    require_same(x.alg, lv(h.level).alg, "Tower::projector_A");
    return adjoint(inverse(h), project(lv(h.level).split, adjoint(h, x), side));
  }

  // -- membership ----------------------------------------------------------------

  bool in_plus_group(const GroupElement& g, double tol = 1e-10) const {
    if (g.level == 0) return is_special_unitary(g.m, tol);
    return in_plus_group(*g.base, tol) && in_side(lv(g.level - 1).split, g.fiber, Side::plus, tol);
  }

  bool in_minus_group(const GroupElement& g, double tol = 1e-10) const {
    if (g.level == 0) return is_b_group(g.m, tol);
    return in_minus_group(*g.base, tol) && in_side(lv(g.level - 1).split, g.fiber, Side::minus, tol);
  }

  // -- flattening ----------------------------------------------------------------

  static int flat_size(int level) {
    int s = 8;
    int d = 6;
    for (int m = 1; m <= level; ++m) {
      s += d;
      d *= 2;
    }
    return s;
  }

  Eigen::VectorXd flatten(const GroupElement& g) const {
    Eigen::VectorXd v(flat_size(g.level));
    flatten_into(g, v.data());
    return v;
  }

  GroupElement unflatten(int level, const Eigen::VectorXd& v) const {
    if (v.size() != flat_size(level)) throw std::invalid_argument("Tower::unflatten: size mismatch");
    int pos = 0;
    return unflatten_at(level, v, pos);
  }

  // d/dt flatten(g(t)) for g^-1 gdot = xi: the left-invariant extension of xi.
  Eigen::VectorXd flatten_body_tangent(const GroupElement& g, const AlgebraElement& xi) const {
    require_same(xi.alg, lv(g.level).alg, "Tower::flatten_body_tangent");
    Eigen::VectorXd v(flat_size(g.level));
    tangent_into(g, xi, v.data());
    return v;
  }

  // d/dt flatten(g(t)) for gdot g^-1 = w: the right-invariant extension,
  // (W,U)^R at (a,V) = (Wa, Ad_{a^-1} U).
  Eigen::VectorXd flatten_right_tangent(const GroupElement& g, const AlgebraElement& w) const {
    require_same(w.alg, lv(g.level).alg, "Tower::flatten_right_tangent");
    Eigen::VectorXd v(flat_size(g.level));
    right_tangent_into(g, w, v.data());
    return v;
  }

  GroupElement reproject(const GroupElement& g, Reproject kind) const {
    if (g.level == 0) {
      switch (kind) {
        case Reproject::plus_group: return g0(polar_su2(g.m));
        case Reproject::minus_group: return g0(b_normalize(g.m));
        case Reproject::full_group: return g0(det_normalize(g.m));
      }
      throw std::logic_error("Tower::reproject: unreachable");
    }
    GroupElement base = reproject(*g.base, kind);
    AlgebraElement fiber = g.fiber;
    const Splitting& sp = lv(g.level - 1).split;
    if (kind == Reproject::plus_group) fiber = project(sp, fiber, Side::plus);
    if (kind == Reproject::minus_group) fiber = project(sp, fiber, Side::minus);
    return gpair(base, fiber);
  }

  std::vector<std::string> group_col_names(int level, const std::string& prefix) const {
    std::vector<std::string> out;
    if (level == 0) {
      for (const char* e : {"_r00", "_i00", "_r01", "_i01", "_r10", "_i10", "_r11", "_i11"})
        out.push_back(prefix + e);
      return out;
    }
    out = group_col_names(level - 1, prefix + "b");
    for (const auto& lb : lv(level - 1).alg->labels) out.push_back(prefix + "f_" + lb);
    return out;
  }

 private:
  void flatten_into(const GroupElement& g, double* p) const {
    if (g.level == 0) {
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
          *p++ = g.m(r, c).real();
          *p++ = g.m(r, c).imag();
        }
      return;
    }
    flatten_into(*g.base, p);
    double* q = p + flat_size(g.level - 1);
    for (int i = 0; i < g.fiber.a.size(); ++i) q[i] = g.fiber.a(i);
  }

  GroupElement unflatten_at(int level, const Eigen::VectorXd& v, int& pos) const {
    if (level == 0) {
      Mat2c m;
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
          m(r, c) = cplx(v(pos), v(pos + 1));
          pos += 2;
        }
      return g0(m);
    }
    GroupElement base = unflatten_at(level - 1, v, pos);
    const int d = lv(level - 1).alg->dim;
    AlgebraElement fiber = element(lv(level - 1).alg, v.segment(pos, d));
    pos += d;
    return gpair(base, fiber);
  }

  void tangent_into(const GroupElement& g, const AlgebraElement& xi, double* p) const {
    if (g.level == 0) {
      Mat2c dm = g.m * md_.realize(xi);
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
          *p++ = dm(r, c).real();
          *p++ = dm(r, c).imag();
        }
      return;
    }
    // (X,U)^L at (a,V) = (aX, [V,X] + U)
    auto [X, U] = pair_split(xi);
    tangent_into(*g.base, X, p);
    Eigen::VectorXd df = (bracket(g.fiber, X) + U).a;
    double* q = p + flat_size(g.level - 1);
    for (int i = 0; i < df.size(); ++i) q[i] = df(i);
  }

  void right_tangent_into(const GroupElement& g, const AlgebraElement& w, double* p) const {
    if (g.level == 0) {
      Mat2c dm = md_.realize(w) * g.m;
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
          *p++ = dm(r, c).real();
          *p++ = dm(r, c).imag();
        }
      return;
    }
    // (W,U)^R at (a,V) = (Wa, Ad_{a^-1} U)
    auto [W, U] = pair_split(w);
    right_tangent_into(*g.base, W, p);
    Eigen::VectorXd df = adjoint(inverse(*g.base), U).a;
    double* q = p + flat_size(g.level - 1);
    for (int i = 0; i < df.size(); ++i) q[i] = df(i);
  }

  Sl2cModel md_;
  std::vector<Level> levels_;
};

// Level-0 element with su(2) coordinates v and zero b-part.
inline AlgebraElement su2_element(const Tower& tw, const Eigen::Vector3d& v) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(6);
  c.head(3) = v;
  return element(tw.lv(0).alg, std::move(c));
}

// ---------------------------------------------------------------------------
// Closed forms on the matrix level for h in B, x in sl(2,C); these duplicate
// Tower::adjoint / Tower::projector_A on level 0 and act as pinned references.

inline AlgebraElement adjoint_b_closed(const Mat2c& h, const AlgebraElement& x) {
  double a, b, c;
  b_entries(h, a, b, c);
  const double x1 = x.a(iX1), x2 = x.a(iX2), x3 = x.a(iX3);
  const double xe = x.a(iE), xie = x.a(iIE), xh = x.a(iH);
  Eigen::VectorXd r(6);
  r(iX1) = x1 / (a * a);
  r(iX2) = x2 / (a * a);
  r(iX3) = x1 * b / a - x2 * c / a + x3;
  r(iE) = 2 * b * c * x1 + (b * b - c * c + a * a - 1 / (a * a)) * x2 + 2 * a * c * x3 +
          a * a * xe - 2 * b * a * xh;
  r(iIE) = (c * c - b * b + a * a - 1 / (a * a)) * x1 + 2 * b * c * x2 - 2 * a * b * x3 +
           a * a * xie - 2 * c * a * xh;
  r(iH) = -(x1 * c / a + x2 * b / a - xh);
  return {x.alg, std::move(r)};
}

inline AlgebraElement a_plus_closed(const Mat2c& h, const AlgebraElement& x) {
  double a, b, c;
  b_entries(h, a, b, c);
  const double x1 = x.a(iX1), x2 = x.a(iX2), x3 = x.a(iX3);
  const double w = b * b + c * c + 1 / (a * a) - a * a;
  Eigen::VectorXd r = Eigen::VectorXd::Zero(6);
  r(iX1) = x1;
  r(iX2) = x2;
  r(iX3) = x3;
  r(iE) = (w * x2 - 2 * a * c * x3) / (a * a);
  r(iIE) = (w * x1 + 2 * a * b * x3) / (a * a);
  r(iH) = (x1 * c + x2 * b) / a;
  return {x.alg, std::move(r)};
}

inline AlgebraElement a_minus_closed(const Mat2c& h, const AlgebraElement& x) {
  double a, b, c;
  b_entries(h, a, b, c);
  const double x1 = x.a(iX1), x2 = x.a(iX2), x3 = x.a(iX3);
  const double xe = x.a(iE), xie = x.a(iIE), xh = x.a(iH);
  const double w = a * a - 1 / (a * a) - b * b - c * c;
  Eigen::VectorXd r = Eigen::VectorXd::Zero(6);
  r(iE) = (w * x2 + 2 * a * c * x3 + a * a * xe) / (a * a);
  r(iIE) = (w * x1 - 2 * a * b * x3 + a * a * xie) / (a * a);
  r(iH) = -((c / a) * x1 + (b / a) * x2 - xh);
  return {x.alg, std::move(r)};
}

}  // namespace aks
