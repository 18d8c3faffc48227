#pragma once

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace aks {

// Finite-dimensional real Lie algebra given by structure constants.
// ad[i](k, j) = c_ijk, so ad[i] * y gives the coefficients of [e_i, y].
struct LieAlgebra {
  int dim = 0;
  int level = 0;
  std::vector<std::string> labels;
  std::vector<Eigen::MatrixXd> ad;

  double c(int i, int j, int k) const { return ad[i](k, j); }
};

using AlgebraPtr = std::shared_ptr<const LieAlgebra>;

inline AlgebraPtr make_algebra(int level, std::vector<std::string> labels,
                               const std::vector<double>& c_flat) {
  const int dim = static_cast<int>(labels.size());
  if (c_flat.size() != static_cast<size_t>(dim) * dim * dim)
    throw std::invalid_argument("make_algebra: structure constant array has wrong size");
  auto alg = std::make_shared<LieAlgebra>();
  alg->dim = dim;
  alg->level = level;
  alg->labels = std::move(labels);
  alg->ad.assign(dim, Eigen::MatrixXd::Zero(dim, dim));
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < dim; ++k) alg->ad[i](k, j) = c_flat[(static_cast<size_t>(i) * dim + j) * dim + k];
  return alg;
}

struct AlgebraElement {
  AlgebraPtr alg;
  Eigen::VectorXd a;
};

struct CoalgebraElement {
  AlgebraPtr alg;
  Eigen::VectorXd a;
};

inline void require_same(const AlgebraPtr& x, const AlgebraPtr& y, const char* where) {
  if (x.get() != y.get()) throw std::invalid_argument(std::string(where) + ": descriptor mismatch");
}

inline AlgebraElement element(AlgebraPtr alg, Eigen::VectorXd a) {
  if (a.size() != alg->dim) throw std::invalid_argument("element: coefficient size mismatch");
  return {std::move(alg), std::move(a)};
}

inline AlgebraElement zero_element(AlgebraPtr alg) {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(alg->dim);
  return {std::move(alg), std::move(z)};
}

inline AlgebraElement basis_element(AlgebraPtr alg, int i) {
  AlgebraElement e = zero_element(std::move(alg));
  e.a(i) = 1.0;
  return e;
}

inline AlgebraElement operator+(const AlgebraElement& x, const AlgebraElement& y) {
  require_same(x.alg, y.alg, "operator+");
  return {x.alg, x.a + y.a};
}
inline AlgebraElement operator-(const AlgebraElement& x, const AlgebraElement& y) {
  require_same(x.alg, y.alg, "operator-");
  return {x.alg, x.a - y.a};
}
inline AlgebraElement operator-(const AlgebraElement& x) { return {x.alg, -x.a}; }
inline AlgebraElement operator*(double s, const AlgebraElement& x) { return {x.alg, s * x.a}; }

inline Eigen::MatrixXd ad_matrix(const AlgebraElement& x) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(x.alg->dim, x.alg->dim);
  for (int i = 0; i < x.alg->dim; ++i)
    if (x.a(i) != 0.0) m += x.a(i) * x.alg->ad[i];
  return m;
}

inline AlgebraElement bracket(const AlgebraElement& x, const AlgebraElement& y) {
  require_same(x.alg, y.alg, "bracket");
  Eigen::VectorXd r = Eigen::VectorXd::Zero(x.alg->dim);
  for (int i = 0; i < x.alg->dim; ++i)
    if (x.a(i) != 0.0) r += x.a(i) * (x.alg->ad[i] * y.a);
  return {x.alg, std::move(r)};
}

// <ad*_x xi, y> = <xi, [x, y]>.
inline CoalgebraElement ad_star(const AlgebraElement& x, const CoalgebraElement& xi) {
  require_same(x.alg, xi.alg, "ad_star");
  return {x.alg, ad_matrix(x).transpose() * xi.a};
}

inline double pair_dual(const CoalgebraElement& xi, const AlgebraElement& x) {
  require_same(xi.alg, x.alg, "pair_dual");
  return xi.a.dot(x.a);
}

// ---------------------------------------------------------------------------
// Bilinear forms

struct BilinearForm {
  AlgebraPtr alg;
  Eigen::MatrixXd m;
  Eigen::MatrixXd m_inv;
  bool ad_invariant = false;
};

inline BilinearForm make_form(AlgebraPtr alg, const Eigen::MatrixXd& m, bool ad_invariant) {
  if (m.rows() != alg->dim || m.cols() != alg->dim)
    throw std::invalid_argument("make_form: matrix size mismatch");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("make_form: matrix is not symmetric");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (!lu.isInvertible()) throw std::invalid_argument("make_form: matrix is degenerate");
  return {std::move(alg), m, lu.inverse(), ad_invariant};
}

inline double pair_form(const BilinearForm& f, const AlgebraElement& x, const AlgebraElement& y) {
  require_same(f.alg, x.alg, "pair_form");
  require_same(f.alg, y.alg, "pair_form");
  return x.a.dot(f.m * y.a);
}

// Index map of the form: gamma(x) = the coefficient vector of k(x, .).
inline CoalgebraElement form_raise(const BilinearForm& f, const AlgebraElement& x) {
  require_same(f.alg, x.alg, "form_raise");
  return {x.alg, f.m * x.a};
}

inline AlgebraElement form_lower(const BilinearForm& f, const CoalgebraElement& xi) {
  require_same(f.alg, xi.alg, "form_lower");
  return {xi.alg, f.m_inv * xi.a};
}

// Residual of k([x_i, x_j], x_k) + k(x_j, [x_i, x_k]) over all basis triples.
inline double ad_invariance_residual(const BilinearForm& f) {
  const auto& alg = *f.alg;
  double worst = 0.0;
  for (int i = 0; i < alg.dim; ++i) {
    Eigen::MatrixXd lhs = f.m * alg.ad[i];          // (k,j): k([e_i,e_j], .) paired
    Eigen::MatrixXd r = lhs + lhs.transpose();      // ad-invariance = antisymmetry of k(ad_i .,.)
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Splittings into complementary subalgebras

enum class Side { plus, minus };

struct Splitting {
  AlgebraPtr alg;
  std::vector<int> plus_idx;
  std::vector<int> minus_idx;
};

inline Splitting make_splitting(AlgebraPtr alg, std::vector<int> plus_idx,
                                std::vector<int> minus_idx) {
  std::vector<char> seen(alg->dim, 0);
  for (int i : plus_idx) {
    if (i < 0 || i >= alg->dim || seen[i]) throw std::invalid_argument("make_splitting: bad plus index");
    seen[i] = 1;
  }
  for (int i : minus_idx) {
    if (i < 0 || i >= alg->dim || seen[i]) throw std::invalid_argument("make_splitting: bad minus index");
    seen[i] = 1;
  }
  for (char s : seen)
    if (!s) throw std::invalid_argument("make_splitting: indices do not cover the algebra");
  return {std::move(alg), std::move(plus_idx), std::move(minus_idx)};
}

inline const std::vector<int>& side_indices(const Splitting& s, Side side) {
  return side == Side::plus ? s.plus_idx : s.minus_idx;
}

inline AlgebraElement project(const Splitting& s, const AlgebraElement& x, Side side) {
  require_same(s.alg, x.alg, "project");
  Eigen::VectorXd r = Eigen::VectorXd::Zero(x.alg->dim);
  for (int i : side_indices(s, side)) r(i) = x.a(i);
  return {x.alg, std::move(r)};
}

inline bool in_side(const Splitting& s, const AlgebraElement& x, Side side, double tol = 1e-10) {
  require_same(s.alg, x.alg, "in_side");
  double off = 0.0;
  for (int i : side_indices(s, side == Side::plus ? Side::minus : Side::plus))
    off = std::max(off, std::abs(x.a(i)));
  return off <= tol * (1.0 + x.a.cwiseAbs().maxCoeff());
}

// Projection of [x_minus, x_plus] onto one side: the infinitesimal dressing
// vectors (x_plus)^(x_minus) (Side::plus) and (x_minus)^(x_plus) (Side::minus).
inline AlgebraElement dressing_component(const Splitting& s, const AlgebraElement& x_minus,
                                         const AlgebraElement& x_plus, Side side) {
  if (!in_side(s, x_minus, Side::minus)) throw std::invalid_argument("dressing_component: first argument is not in the minus subalgebra");
  if (!in_side(s, x_plus, Side::plus)) throw std::invalid_argument("dressing_component: second argument is not in the plus subalgebra");
  return project(s, bracket(x_minus, x_plus), side);
}

// Max coefficient leaking out of a side under brackets of that side's basis.
inline double closure_residual(const Splitting& s, Side side) {
  const auto& idx = side_indices(s, side);
  const auto& other = side_indices(s, side == Side::plus ? Side::minus : Side::plus);
  double worst = 0.0;
  for (int i : idx)
    for (int j : idx)
      for (int k : other) worst = std::max(worst, std::abs(s.alg->c(i, j, k)));
  return worst;
}

inline double isotropy_residual(const BilinearForm& f, const Splitting& s) {
  require_same(f.alg, s.alg, "isotropy_residual");
  double worst = 0.0;
  for (int i : s.plus_idx)
    for (int j : s.plus_idx) worst = std::max(worst, std::abs(f.m(i, j)));
  for (int i : s.minus_idx)
    for (int j : s.minus_idx) worst = std::max(worst, std::abs(f.m(i, j)));
  return worst;
}

// ---------------------------------------------------------------------------
// Structure checks

struct CheckResult {
  bool pass = true;
  double max_residual = 0.0;
  std::array<int, 3> worst = {-1, -1, -1};
};

inline CheckResult check_antisymmetry(const AlgebraPtr& alg, double tol = 1e-12) {
  CheckResult r;
  for (int i = 0; i < alg->dim; ++i)
    for (int j = 0; j < alg->dim; ++j)
      for (int k = 0; k < alg->dim; ++k) {
        double v = std::abs(alg->c(i, j, k) + alg->c(j, i, k));
        if (v > r.max_residual) {
          r.max_residual = v;
          r.worst = {i, j, k};
        }
      }
  r.pass = r.max_residual <= tol;
  return r;
}

inline CheckResult check_jacobi(const AlgebraPtr& alg, double tol = 1e-12) {
  CheckResult r;
  const int d = alg->dim;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      Eigen::VectorXd cij = alg->ad[i].col(j);
      for (int k = j + 1; k < d; ++k) {
        // [[e_i,e_j],e_k] = -ad[k] [e_i,e_j], cyclic in (i,j,k)
        Eigen::VectorXd jac = -(alg->ad[k] * cij) - alg->ad[i] * alg->ad[j].col(k) -
                              alg->ad[j] * alg->ad[k].col(i);
        double v = jac.cwiseAbs().maxCoeff();
        if (v > r.max_residual) {
          r.max_residual = v;
          r.worst = {i, j, k};
        }
      }
    }
  r.pass = r.max_residual <= tol;
  return r;
}

// ---------------------------------------------------------------------------
// Characters of a subalgebra

// Dual vectors xi supported on `restrict_idx` with xi([x,y]) = 0 for all x, y
// in the span of restrict_idx. Returned as full-dimensional dual coefficient
// vectors. Nullspace cut at a 1e-10 relative singular value threshold.
inline std::vector<CoalgebraElement> character_space(const AlgebraPtr& alg,
                                                     const std::vector<int>& restrict_idx) {
  const int n = static_cast<int>(restrict_idx.size());
  if (n == 0) return {};
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) pairs.emplace_back(restrict_idx[a], restrict_idx[b]);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(std::max<size_t>(pairs.size(), 1), n);
  for (size_t row = 0; row < pairs.size(); ++row)
    for (int col = 0; col < n; ++col)
      A(static_cast<int>(row), col) = alg->c(pairs[row].first, pairs[row].second, restrict_idx[col]);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  std::vector<CoalgebraElement> out;
  for (int c = 0; c < n; ++c) {
    double sv = c < svd.singularValues().size() ? svd.singularValues()(c) : 0.0;
    if (sv <= 1e-10 * std::max(smax, 1.0)) {
      Eigen::VectorXd full = Eigen::VectorXd::Zero(alg->dim);
      for (int i = 0; i < n; ++i) full(restrict_idx[i]) = svd.matrixV()(i, c);
      out.push_back({alg, std::move(full)});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Semidirect sum g (+) g with the second copy abelian and acted on by ad:
// [(Y,V),(X,Z)] = ([Y,X], [Y,Z] + [V,X]).

struct SemidirectLevel {
  AlgebraPtr alg;
  BilinearForm form;
  Splitting split;
};

inline SemidirectLevel semidirect_sum(const AlgebraPtr& alg, const BilinearForm& form,
                                      const Splitting& split, bool half_factor) {
  const int d = alg->dim;
  const int d2 = 2 * d;
  std::vector<std::string> labels(d2);
  for (int i = 0; i < d; ++i) {
    labels[i] = alg->labels[i];
    labels[d + i] = alg->labels[i] + "'";
  }
  std::vector<double> c(static_cast<size_t>(d2) * d2 * d2, 0.0);
  auto put = [&](int i, int j, int k, double v) {
    c[(static_cast<size_t>(i) * d2 + j) * d2 + k] = v;
  };
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        double v = alg->c(i, j, k);
        if (v == 0.0) continue;
        put(i, j, k, v);          // [base, base] -> base
        put(i, d + j, d + k, v);  // [base, fiber] -> fiber
        put(d + i, j, d + k, v);  // [fiber, base] -> fiber
      }
  AlgebraPtr alg2 = make_algebra(alg->level + 1, std::move(labels), c);
  const double kf = half_factor ? 0.5 : 1.0;
  Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(d2, d2);
  m2.block(0, d, d, d) = kf * form.m;
  m2.block(d, 0, d, d) = kf * form.m;
  std::vector<int> plus2, minus2;
  for (int i : split.plus_idx) {
    plus2.push_back(i);
    plus2.push_back(d + i);
  }
  for (int i : split.minus_idx) {
    minus2.push_back(i);
    minus2.push_back(d + i);
  }
  BilinearForm form2 = make_form(alg2, m2, form.ad_invariant);
  Splitting split2 = make_splitting(alg2, std::move(plus2), std::move(minus2));
  return {alg2, std::move(form2), std::move(split2)};
}

}  // namespace aks
