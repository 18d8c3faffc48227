#pragma once

#include <random>

#include "aks/group.hpp"

namespace aks {

using Rng = std::mt19937_64;

inline double rand_real(Rng& g, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  return u(g);
}

inline Eigen::VectorXd rand_vector(Rng& g, int n, double scale = 1.0) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = scale * rand_real(g);
  return v;
}

inline Eigen::Vector3d rand_vec3(Rng& g, double scale = 1.0) {
  return Eigen::Vector3d(rand_real(g, -scale, scale), rand_real(g, -scale, scale),
                         rand_real(g, -scale, scale));
}

inline Eigen::Vector3d rand_unit3(Rng& g) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::Vector3d v;
  do {
    v << nd(g), nd(g), nd(g);
  } while (v.norm() < 1e-6);
  return v / v.norm();
}

inline AlgebraElement rand_element(Rng& g, const AlgebraPtr& alg, double scale = 1.0) {
  return element(alg, rand_vector(g, alg->dim, scale));
}

inline AlgebraElement rand_side_element(Rng& g, const Tower& tw, int alevel, Side side,
                                        double scale = 1.0) {
  const Tower::Level& L = tw.lv(alevel);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(L.alg->dim);
  for (int i : side_indices(L.split, side)) v(i) = scale * rand_real(g);
  return element(L.alg, v);
}

// Group points as exponentials; a side element exponentiates into its factor
// subgroup, so these draws carry exact membership tags.
inline GroupElement rand_group(Rng& g, const Tower& tw, int level, double scale = 0.7) {
  return tw.exp(rand_element(g, tw.lv(level).alg, scale));
}

inline GroupElement rand_plus_group(Rng& g, const Tower& tw, int level, double scale = 0.7) {
  return tw.exp(rand_side_element(g, tw, level, Side::plus, scale));
}

inline GroupElement rand_minus_group(Rng& g, const Tower& tw, int level, double scale = 0.7) {
  return tw.exp(rand_side_element(g, tw, level, Side::minus, scale));
}

}  // namespace aks
