// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "ornet/ornn.hpp"

#include <Eigen/SVD>

namespace ornet::ornn {

namespace {

// copy a vector into block `blk` of a width n*K vector
Vec embed_block(const Vec& v, int blk, int n, int K) {
  Vec out = Vec::Zero(std::size_t(n) * K);
  out.segment(std::size_t(blk) * n, n) = v;
  return out;
}

}  // namespace

Mat WidenResult::widen_lambda(const Mat& lambda) const {
  const int n = original_width;
  const int K = wide.width() / n;
  Mat out = Mat::Zero(wide.width(), wide.width());
  for (int b = 0; b < K; ++b) out.block(b * n, b * n, n, n) = lambda;
  return out;
}

Vec WidenResult::widen_h0(const Vec& h0) const {
  Vec out = Vec::Zero(wide.width());
  out.head(original_width) = h0;
  return out;
}

Vec WidenResult::project(const Vec& wide_out) const { return wide_out.head(original_width); }

WidenResult widen_general_to_basic(const ParamSet& params) {
  const int n = params.width();
  const int K = params.lag();
  const int L = params.depth();

  NetworkSpec wspec;
  wspec.depth = L;
  wspec.width = n * K;
  wspec.lag = 1;
  wspec.leak = params.leak();
  wspec.truncation_bound = params.spec().truncation_bound;
  // block companion fixed parts can exceed unit norm when the original fixed
  // parts are nonzero; caps stay enforced on the factor vectors through the
  // constructor path below, which only ever stores unit-capped factors
  wspec.unconstrained = true;
  ParamSet wide(wspec, params.grouping());

  for (int l = 1; l <= L; ++l) {
    for (int i = 0; i < 2; ++i) {
      // fixed part: top block row carries the original fixed ops, and the
      // skip branch (i = 0) additionally holds the sub-diagonal identity
      // blocks implementing the state shift
      bool any = (i == 0 && K > 1);
      for (int k = 1; k <= K; ++k)
        any = any || !params.fixed_a(l, k, i).is_zero() || !params.fixed_b(l, k, i).is_zero();
      Mat fa = Mat::Zero(n * K, n * K), fb = Mat::Zero(n * K, n * K);
      for (int k = 1; k <= K; ++k) {
        fa.block(0, (k - 1) * n, n, n) = params.fixed_a(l, k, i).materialize(n);
        fb.block(0, (k - 1) * n, n, n) = params.fixed_b(l, k, i).materialize(n);
      }
      if (i == 0)
        for (int j = 1; j < K; ++j) fa.block(j * n, (j - 1) * n, n, n) = Mat::Identity(n, n);
      if (any) {
        wide.set_fixed_a(l, 1, i, FixedOp::from_dense(std::move(fa)));
        wide.set_fixed_b(l, 1, i, FixedOp::from_dense(std::move(fb)));
      }

      // factors: original pair p at lag k lands in wide pair (k-1)*n + p,
      // with u in block 0 and v in block k-1
      for (int k = 1; k <= K; ++k) {
        for (int p = 1; p <= n; ++p) {
          const Vec& u = params.vector({l, k, i, 2 * p - 1});
          const Vec& v = params.vector({l, k, i, 2 * p});
          const int wp = (k - 1) * n + p;  // wide A pair in 1..nK
          wide.set_vector({l, 1, i, 2 * wp - 1}, embed_block(u, 0, n, K));
          wide.set_vector({l, 1, i, 2 * wp}, embed_block(v, k - 1, n, K));
        }
        for (int p = n + 1; p <= 2 * n; ++p) {
          const Vec& u = params.vector({l, k, i, 2 * p - 1});
          const Vec& v = params.vector({l, k, i, 2 * p});
          const int wn = n * K;
          const int wp = wn + (k - 1) * n + (p - n);  // wide B pair
          wide.set_vector({l, 1, i, 2 * wp - 1}, embed_block(u, 0, n, K));
          wide.set_vector({l, 1, i, 2 * wp}, embed_block(v, k - 1, n, K));
        }
      }
    }
    // biases: top block only
    for (int i = 0; i < 2; ++i)
      wide.set_vector({l, 1, i, 0}, embed_block(params.bias(l, i), 0, n, K));
  }

  WidenResult res;
  res.wide = std::move(wide);
  res.original_width = n;
  return res;
}

ParamSet rewrite_leaky_to_standard(const ParamSet& params, double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw DomainError("rewrite requires eta in (0,1)");
  const int n = params.width();
  const int L = params.depth();
  const int K = params.lag();

  NetworkSpec spec = params.spec();
  spec.leak = 0.0;
  spec.unconstrained = true;  // combined affine parts need not respect the slot budget
  ParamSet out(spec, params.grouping());

  const double s = std::sqrt(1.0 - eta);
  for (int l = 1; l <= L; ++l) {
    for (int k = 1; k <= K; ++k) {
      // skip branch: dense fixed A^{l,k,0} + eta A^{l,k,1}, same for B
      out.set_fixed_a(l, k, 0,
                      FixedOp::from_dense(params.weight_a(l, k, 0) + eta * params.weight_a(l, k, 1)));
      out.set_fixed_b(l, k, 0,
                      FixedOp::from_dense(params.weight_b(l, k, 0) + eta * params.weight_b(l, k, 1)));
      // activation branch scaled by (1 - eta); phi0 is positively homogeneous
      // so the scale splits as sqrt(1-eta) on each factor
      out.set_fixed_a(l, k, 1, params.fixed_a(l, k, 1).is_zero()
                                   ? FixedOp::zero()
                                   : FixedOp::from_dense((1.0 - eta) *
                                                         params.fixed_a(l, k, 1).materialize(n)));
      out.set_fixed_b(l, k, 1, params.fixed_b(l, k, 1).is_zero()
                                   ? FixedOp::zero()
                                   : FixedOp::from_dense((1.0 - eta) *
                                                         params.fixed_b(l, k, 1).materialize(n)));
      for (int sl = 1; sl <= 4 * n; ++sl)
        out.set_vector({l, k, 1, sl}, s * params.vector({l, k, 1, sl}));
    }
    out.set_vector({l, 1, 0, 0}, params.bias(l, 0) + eta * params.bias(l, 1));
    out.set_vector({l, 1, 1, 0}, (1.0 - eta) * params.bias(l, 1));
  }
  return out;
}

Vec standard_nn_forward(const std::vector<StdLayer>& std_layers, const Vec& x, double eta) {
  Vec h = x;
  for (const auto& layer : std_layers) {
    if (layer.skip.cols() != h.size() || layer.weight.cols() != h.size())
      throw DimensionError("standard layer width mismatch");
    Vec lin = layer.skip * h;
    Vec act = layer.bias + layer.weight * h;
    h = lin + leaky_relu(act, eta);
  }
  return h;
}

namespace {

// write a dense matrix into the trained slots of one branch via its SVD;
// marks the set unconstrained when a factor would exceed the cap
void factor_into_branch(ParamSet& ps, int layer, int lag, int branch, bool b_side, const Mat& m) {
  const int n = ps.width();
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec& sv = svd.singularValues();
  for (int r = 0; r < n; ++r) {
    if (sv[r] <= 0.0) break;
    const double rt = std::sqrt(sv[r]);
    if (rt > 1.0 && !ps.spec().unconstrained) ps.mark_unconstrained();
    const int p = b_side ? n + (r + 1) : r + 1;
    ps.set_vector({layer, lag, branch, 2 * p - 1}, rt * svd.matrixU().col(r));
    ps.set_vector({layer, lag, branch, 2 * p}, rt * svd.matrixV().col(r));
  }
}

}  // namespace

EmbedResult embed_standard_nn(const std::vector<StdLayer>& std_layers, const Vec& lambda_vec,
                              double eta) {
  require(!std_layers.empty(), "empty standard network");
  const int n = int(lambda_vec.size());
  for (const auto& layer : std_layers)
    if (layer.skip.rows() != n || layer.skip.cols() != n || layer.weight.rows() != n ||
        layer.weight.cols() != n || layer.bias.size() != n)
      throw DimensionError("embedding requires square layers of the input width");

  NetworkSpec spec;
  spec.depth = int(std_layers.size());
  spec.width = n;
  spec.lag = 1;
  spec.leak = eta;
  ParamSet ps(spec);

  for (int l = 1; l <= spec.depth; ++l) {
    const auto& layer = std_layers[l - 1];
    if (l == 1) {
      // Lambda * 1 = lambda, so the first layer injects the input through
      // the B branch
      factor_into_branch(ps, l, 1, 0, true, layer.skip);
      factor_into_branch(ps, l, 1, 1, true, layer.weight);
    } else {
      factor_into_branch(ps, l, 1, 0, false, layer.skip);
      factor_into_branch(ps, l, 1, 1, false, layer.weight);
    }
    if (layer.bias.norm() > 1.0 && !ps.spec().unconstrained) ps.mark_unconstrained();
    ps.set_vector({l, 1, 1, 0}, layer.bias);
  }

  EmbedResult res;
  res.params = std::move(ps);
  res.lambda = lambda_vec.asDiagonal();
  res.h0 = Vec::Ones(n);
  return res;
}

}  // namespace ornet::ornn
