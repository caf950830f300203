// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "ornet/ornn.hpp"
#include "ornet/rng.hpp"

namespace testutil {

using namespace ornet;

// random operator scaled to ||m|| <= cap
inline Mat random_contraction(Rng& rng, int n, double cap = 1.0) {
  Mat m = rng.normal_mat(n, n);
  const double nrm = operator_norm(m);
  if (nrm > 0.0) m *= cap / nrm * rng.uniform(0.3, 1.0);
  return m;
}

inline Vec random_unit(Rng& rng, int n, double scale = 1.0) {
  Vec v = rng.normal_vec(n);
  const double nv = v.norm();
  if (nv > 0) v *= scale / nv;
  return v;
}

// parameter set with every slot filled by small random factors (caps held)
inline ornn::ParamSet random_paramset(Rng& rng, int depth, int width, int lag = 1,
                                      double eta = 0.0, double fill = 0.45) {
  ornn::NetworkSpec spec;
  spec.depth = depth;
  spec.width = width;
  spec.lag = lag;
  spec.leak = eta;
  ornn::ParamSet ps(spec);
  for (int l = 1; l <= depth; ++l) {
    for (int k = 1; k <= lag; ++k)
      for (int i = 0; i < 2; ++i)
        for (int s = 1; s <= 4 * width; ++s)
          ps.set_vector({l, k, i, s}, random_unit(rng, width, fill * rng.uniform(0.2, 1.0)));
    for (int i = 0; i < 2; ++i)
      ps.set_vector({l, 1, i, 0}, random_unit(rng, width, 0.4 * rng.uniform(0.0, 1.0)));
  }
  return ps;
}

// sparse variant: a fraction of the P1 slots populated
inline ornn::ParamSet sparse_paramset(Rng& rng, int depth, int width, int active_pairs) {
  ornn::NetworkSpec spec;
  spec.depth = depth;
  spec.width = width;
  spec.lag = 1;
  ornn::ParamSet ps(spec);
  for (int a = 0; a < active_pairs; ++a) {
    const int l = 1 + int(rng.below(depth));
    const int i = int(rng.below(2));
    const int p = 1 + int(rng.below(2 * width));
    ps.set_vector({l, 1, i, 2 * p - 1}, random_unit(rng, width, 0.8));
    ps.set_vector({l, 1, i, 2 * p}, random_unit(rng, width, 0.8));
  }
  return ps;
}

// divided differences f[t0..tk]; returns the k-th order coefficient
inline double divided_difference(std::vector<double> ts, std::vector<double> fs) {
  const std::size_t m = ts.size();
  for (std::size_t order = 1; order < m; ++order)
    for (std::size_t i = 0; i + order < m; ++i)
      fs[i] = (fs[i + 1] - fs[i]) / (ts[i + order] - ts[i]);
  return fs[0];
}

// plain two-sided Jacobi singular values, independent of Eigen's SVD path
inline std::vector<double> jacobi_singular_values(Mat a) {
  const int n = int(a.rows());
  Mat g = a.transpose() * a;
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += g(p, q) * g(p, q);
    if (off < 1e-28) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(g(p, q)) < 1e-300) continue;
        const double tau = (g(q, q) - g(p, p)) / (2.0 * g(p, q));
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t), s = t * c;
        Mat rot = Mat::Identity(n, n);
        rot(p, p) = c; rot(q, q) = c; rot(p, q) = s; rot(q, p) = -s;
        g = rot.transpose() * g * rot;
      }
  }
  std::vector<double> sv(n);
  for (int i = 0; i < n; ++i) sv[i] = std::sqrt(std::max(0.0, g(i, i)));
  std::sort(sv.begin(), sv.end(), std::greater<double>());
  return sv;
}

}  // namespace testutil
