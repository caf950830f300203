// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "ornet/ornn.hpp"

namespace ornet::ornn {

Vec leaky_relu(const Eigen::Ref<const Vec>& x, double eta) {
  require(eta >= 0.0 && eta <= 1.0, "leak outside [0,1]");
  return x.cwiseMax(eta * x);
}

ForwardTrace forward_general(const ParamSet& params, const Mat& lambda, const Vec& h0) {
  const int n = params.width();
  const int L = params.depth();
  const int K = params.lag();
  const double eta = params.leak();
  if (lambda.rows() != n || lambda.cols() != n)
    throw DimensionError("data operator is not width x width");
  if (h0.size() != n) throw DimensionError("h0 length != width");

  ForwardTrace tr;
  tr.layers.reserve(L);
  tr.act_args.reserve(L);
  tr.signs.reserve(L);

  // h_states[j] = h_j for j = 0..L, with h_{-k} treated as zero
  std::vector<Vec> h(L + 1);
  std::vector<Vec> lam_h(L + 1);  // cache Lambda * h_j
  h[0] = h0;
  lam_h[0].noalias() = lambda * h0;

  for (int l = 1; l <= L; ++l) {
    Vec lin = params.bias(l, 0);
    Vec act = params.bias(l, 1);
    for (int k = 1; k <= K && l - k >= 0; ++k) {
      const Vec& hp = h[l - k];
      const Vec& lhp = lam_h[l - k];
      lin.noalias() += params.weight_a(l, k, 0) * hp;
      lin.noalias() += params.weight_b(l, k, 0) * lhp;
      act.noalias() += params.weight_a(l, k, 1) * hp;
      act.noalias() += params.weight_b(l, k, 1) * lhp;
    }
    Vec hl = lin + leaky_relu(act, eta);
    if (!hl.allFinite()) throw NumericalError("non-finite state at layer " + std::to_string(l));
    Eigen::VectorXi sg(n);
    for (int j = 0; j < n; ++j) sg[j] = act[j] > 0.0 ? 1 : -1;
    tr.act_args.push_back(act);
    tr.signs.push_back(std::move(sg));
    h[l] = hl;
    if (l < L) lam_h[l].noalias() = lambda * h[l];
    tr.layers.push_back(std::move(hl));
  }
  tr.output = tr.layers.back();
  return tr;
}

ForwardTrace forward_basic(const ParamSet& params, const Mat& lambda, const Vec& h0) {
  require(params.lag() == 1, "forward_basic requires K = 1");
  return forward_general(params, lambda, h0);
}

Vec clamp_via_relu(const Eigen::Ref<const Vec>& x, double m) {
  require(m >= 0.0, "truncation bound must be nonnegative");
  // G(x) = -b + phi0(b + y), y = b - phi0(b - x), b = (m,...,m)
  Vec b = Vec::Constant(x.size(), m);
  Vec y = b - leaky_relu(b - x, 0.0);
  return -b + leaky_relu(b + y, 0.0);
}

Vec truncate_forward(const ParamSet& params, const Mat& lambda, const Vec& h0, double m) {
  return clamp_via_relu(forward_general(params, lambda, h0).output, m);
}

ParamGrad zero_grad_like(const ParamSet& params) {
  ParamGrad g;
  g.p1.assign(params.storage_p1_size(), Vec::Zero(params.width()));
  g.p2.assign(params.storage_p2_size(), Vec::Zero(params.width()));
  g.h0 = Vec::Zero(params.width());
  return g;
}

void ParamGrad::add_scaled(const ParamGrad& other, double s) {
  for (std::size_t i = 0; i < p1.size(); ++i) p1[i] += s * other.p1[i];
  for (std::size_t i = 0; i < p2.size(); ++i) p2[i] += s * other.p2[i];
  h0 += s * other.h0;
}

void ParamGrad::scale(double s) {
  for (auto& v : p1) v *= s;
  for (auto& v : p2) v *= s;
  h0 *= s;
}

ParamGrad backward(const ParamSet& params, const Mat& lambda, const Vec& h0,
                   const ForwardTrace& trace, const Vec& out_grad) {
  const int n = params.width();
  const int L = params.depth();
  const int K = params.lag();
  const double eta = params.leak();
  if (out_grad.size() != n) throw DimensionError("output gradient length != width");

  ParamGrad grad = zero_grad_like(params);

  Vec seed = out_grad;
  if (params.spec().truncation_bound) {
    // clamp derivative: pass-through strictly inside (-m, m), zero outside;
    // the boundary uses the phi0(0) -> 0 subgradient of the two-ReLU form
    const double m = *params.spec().truncation_bound;
    const Vec& raw = trace.output;
    for (int j = 0; j < n; ++j)
      if (!(raw[j] > -m && raw[j] < m)) seed[j] = 0.0;
  }

  // grad_h[j] accumulates d(loss)/d h_j while walking layers downward
  std::vector<Vec> grad_h(L + 1, Vec::Zero(n));
  grad_h[L] = seed;

  auto state = [&](int j) -> const Vec& { return j == 0 ? h0 : trace.layers[j - 1]; };

  for (int l = L; l >= 1; --l) {
    const Vec& g_lin = grad_h[l];
    if (g_lin.isZero(0.0)) continue;
    const Vec& z = trace.act_args[l - 1];
    Vec g_act(n);
    for (int j = 0; j < n; ++j) g_act[j] = g_lin[j] * (z[j] > 0.0 ? 1.0 : eta);

    const int g = params.group_of_layer(l);
    grad.p2[params.storage_index_p2(g, 0)] += g_lin;
    grad.p2[params.storage_index_p2(g, 1)] += g_act;

    Vec lamT_glin = lambda.transpose() * g_lin;
    Vec lamT_gact = lambda.transpose() * g_act;

    for (int k = 1; k <= K && l - k >= 0; ++k) {
      const Vec& hp = state(l - k);
      Vec lam_hp = lambda * hp;
      for (int i = 0; i < 2; ++i) {
        const Vec& gij = (i == 0) ? g_lin : g_act;
        const Vec& lamT_g = (i == 0) ? lamT_glin : lamT_gact;
        // A-branch factors: dA = g * hp^T, so du = dA v = (v.hp) g, dv = dA^T u = (u.g) hp
        for (int p = 1; p <= n; ++p) {
          const std::size_t iu = params.storage_index_p1(g, k, i, 2 * p - 1);
          const std::size_t iv = params.storage_index_p1(g, k, i, 2 * p);
          const Vec& u = params.storage_p1(iu);
          const Vec& v = params.storage_p1(iv);
          grad.p1[iu] += (v.dot(hp)) * gij;
          grad.p1[iv] += (u.dot(gij)) * hp;
        }
        // B-branch factors act on Lambda * hp
        for (int p = n + 1; p <= 2 * n; ++p) {
          const std::size_t iu = params.storage_index_p1(g, k, i, 2 * p - 1);
          const std::size_t iv = params.storage_index_p1(g, k, i, 2 * p);
          const Vec& u = params.storage_p1(iu);
          const Vec& v = params.storage_p1(iv);
          grad.p1[iu] += (v.dot(lam_hp)) * gij;
          grad.p1[iv] += (u.dot(gij)) * lam_hp;
        }
        // back-propagate into h_{l-k}
        const Mat& wa = params.weight_a(l, k, i);
        const Mat& wb = params.weight_b(l, k, i);
        grad_h[l - k].noalias() += wa.transpose() * gij;
        grad_h[l - k].noalias() += lambda.transpose() * (wb.transpose() * gij);
        (void)lamT_g;
      }
    }
  }
  grad.h0 = grad_h[0];
  return grad;
}

}  // namespace ornet::ornn
