// SPDX-License-Identifier: Apache-2.0
#include <limits>
#include <cmath>

#include "ornet/ornn.hpp"

#include <Eigen/SVD>

namespace ornet::ornn {

double regularizer(const ParamSet& params) {
  double sum = 0.0;
  for (int l = 1; l <= params.depth(); ++l) sum += regularizer_layer(params, l);
  return sum;
}

double regularizer_layer(const ParamSet& params, int layer) {
  double sum = 0.0;
  for (int k = 1; k <= params.lag(); ++k) sum += regularizer_layer_lag(params, layer, k);
  return sum;
}

double regularizer_layer_lag(const ParamSet& params, int layer, int lag) {
  double sum = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int s = 1; s <= 4 * params.width(); ++s)
      sum += params.vector({layer, lag, i, s}).norm();
  return 0.5 * sum;
}

double schatten_seminorm(const Mat& a, double p) {
  require(p > 0.0, "Schatten index must be positive");
  if (!a.allFinite()) throw NumericalError("non-finite matrix in schatten_seminorm");
  Eigen::JacobiSVD<Mat> svd(a);
  const Vec& sv = svd.singularValues();
  if (!sv.allFinite()) throw NumericalError("SVD failed");
  // rank-revealing cutoff: noise-level singular values would otherwise be
  // amplified for p < 1
  const double cut = sv.size() > 0
                         ? sv[0] * double(std::max(a.rows(), a.cols())) *
                               std::numeric_limits<double>::epsilon()
                         : 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > cut) acc += std::pow(sv[i], p);
  return acc == 0.0 ? 0.0 : std::pow(acc, 1.0 / p);
}

SparsityCount sparsity_count(const ParamSet& params, double tol) {
  require(tol >= 0.0, "tolerance must be nonnegative");
  SparsityCount c;
  for (int l = 1; l <= params.depth(); ++l) {
    for (int k = 1; k <= params.lag(); ++k)
      for (int i = 0; i < 2; ++i)
        for (int s = 1; s <= 4 * params.width(); ++s)
          if (params.vector({l, k, i, s}).norm() > tol) ++c.p1;
    for (int i = 0; i < 2; ++i)
      if (params.bias(l, i).norm() > tol) ++c.total;
  }
  c.total += c.p1;
  return c;
}

double lipschitz_bound(const ParamSet& params, const ParamIndex& ix) {
  require(params.lag() == 1, "lipschitz_bound requires K = 1");
  // validates the index (throws IndexError outside P)
  (void)params.vector(ix);
  const double scale = std::pow(4.0, params.depth() + 1) * std::exp(regularizer(params));
  if (ix.slot == 0) return scale;
  const int partner = (ix.slot % 2 == 1) ? ix.slot + 1 : ix.slot - 1;
  return scale * params.vector({ix.layer, ix.lag, ix.branch, partner}).norm();
}

}  // namespace ornet::ornn
