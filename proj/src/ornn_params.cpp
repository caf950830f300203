// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "ornet/ornn.hpp"

#include <Eigen/SVD>

namespace ornet {

double operator_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

}  // namespace ornet

namespace ornet::ornn {

double FixedOp::norm(int) const {
  switch (kind) {
    case FixedKind::Zero: return 0.0;
    case FixedKind::Identity: return 1.0;
    case FixedKind::ScaledIdentity: return std::abs(scale);
    case FixedKind::Dense: return operator_norm(dense);
  }
  return 0.0;
}

Mat FixedOp::materialize(int n) const {
  switch (kind) {
    case FixedKind::Zero: return Mat::Zero(n, n);
    case FixedKind::Identity: return Mat::Identity(n, n);
    case FixedKind::ScaledIdentity: return scale * Mat::Identity(n, n);
    case FixedKind::Dense: return dense;
  }
  return Mat::Zero(n, n);
}

void FixedOp::apply_add(const Eigen::Ref<const Vec>& x, Vec& y) const {
  switch (kind) {
    case FixedKind::Zero: return;
    case FixedKind::Identity: y += x; return;
    case FixedKind::ScaledIdentity: y += scale * x; return;
    case FixedKind::Dense: y.noalias() += dense * x; return;
  }
}

void FixedOp::apply_transpose_add(const Eigen::Ref<const Vec>& x, Vec& y) const {
  switch (kind) {
    case FixedKind::Zero: return;
    case FixedKind::Identity: y += x; return;
    case FixedKind::ScaledIdentity: y += scale * x; return;
    case FixedKind::Dense: y.noalias() += dense.transpose() * x; return;
  }
}

ParamSet::ParamSet(NetworkSpec spec) : ParamSet(spec, [&] {
  std::vector<int> g(spec.depth);
  for (int l = 0; l < spec.depth; ++l) g[l] = l;
  return g;
}()) {}

ParamSet::ParamSet(NetworkSpec spec, std::vector<int> group_of_layer)
    : spec_(spec), group_of_layer_(std::move(group_of_layer)) {
  require(spec_.depth >= 1 && spec_.width >= 1 && spec_.lag >= 1, "bad network dimensions");
  require(spec_.leak >= 0.0 && spec_.leak <= 1.0, "leak outside [0,1]");
  require(int(group_of_layer_.size()) == spec_.depth, "grouping size != depth");
  num_groups_ = 1 + *std::max_element(group_of_layer_.begin(), group_of_layer_.end());
  for (int g : group_of_layer_) require(g >= 0 && g < num_groups_, "bad group id");

  const int n = spec_.width;
  p1_.assign(std::size_t(num_groups_) * spec_.lag * 2 * 4 * n, Vec::Zero(n));
  p2_.assign(std::size_t(num_groups_) * 2, Vec::Zero(n));
  fa_.assign(std::size_t(spec_.depth) * spec_.lag * 2, FixedOp::zero());
  fb_.assign(std::size_t(spec_.depth) * spec_.lag * 2, FixedOp::zero());
}

std::size_t ParamSet::storage_index_p1(int group, int lag, int branch, int slot) const {
  const int n = spec_.width;
  return ((std::size_t(group) * spec_.lag + (lag - 1)) * 2 + branch) * (4 * n) + (slot - 1);
}

std::size_t ParamSet::storage_index_p2(int group, int branch) const {
  return std::size_t(group) * 2 + branch;
}

void ParamSet::check_index(const ParamIndex& ix, bool bias_ok) const {
  if (ix.layer < 1 || ix.layer > spec_.depth || ix.lag < 1 || ix.lag > spec_.lag ||
      ix.branch < 0 || ix.branch > 1 || ix.slot < 0 || ix.slot > 4 * spec_.width)
    throw IndexError("parameter index outside P");
  if (ix.slot == 0 && (!bias_ok || ix.lag != 1))
    throw IndexError("bias slot only valid at lag 1");
}

const Vec& ParamSet::vector(const ParamIndex& ix) const {
  check_index(ix, true);
  const int g = group_of_layer_[ix.layer - 1];
  if (ix.slot == 0) return p2_[storage_index_p2(g, ix.branch)];
  return p1_[storage_index_p1(g, ix.lag, ix.branch, ix.slot)];
}

void ParamSet::set_vector(const ParamIndex& ix, Vec v) {
  check_index(ix, true);
  if (v.size() != spec_.width) throw DimensionError("parameter vector length != width");
  if (!v.allFinite()) throw NumericalError("non-finite parameter vector");
  if (!spec_.unconstrained && v.norm() > 1.0 + 1e-12)
    throw DomainError("parameter vector norm exceeds the Theta0 cap");
  const int g = group_of_layer_[ix.layer - 1];
  if (ix.slot == 0)
    p2_[storage_index_p2(g, ix.branch)] = std::move(v);
  else
    p1_[storage_index_p1(g, ix.lag, ix.branch, ix.slot)] = std::move(v);
  dirty_ = true;
}

const FixedOp& ParamSet::fixed_a(int layer, int lag, int branch) const {
  return fa_[(std::size_t(layer - 1) * spec_.lag + (lag - 1)) * 2 + branch];
}
const FixedOp& ParamSet::fixed_b(int layer, int lag, int branch) const {
  return fb_[(std::size_t(layer - 1) * spec_.lag + (lag - 1)) * 2 + branch];
}

void ParamSet::set_fixed_a(int layer, int lag, int branch, FixedOp op) {
  if (!spec_.unconstrained && op.norm(spec_.width) > 1.0 + 1e-9)
    throw DomainError("fixed operator norm exceeds 1");
  fa_[(std::size_t(layer - 1) * spec_.lag + (lag - 1)) * 2 + branch] = std::move(op);
  dirty_ = true;
}
void ParamSet::set_fixed_b(int layer, int lag, int branch, FixedOp op) {
  if (!spec_.unconstrained && op.norm(spec_.width) > 1.0 + 1e-9)
    throw DomainError("fixed operator norm exceeds 1");
  fb_[(std::size_t(layer - 1) * spec_.lag + (lag - 1)) * 2 + branch] = std::move(op);
  dirty_ = true;
}

void ParamSet::rebuild_cache() const {
  const int n = spec_.width;
  wa_.assign(std::size_t(spec_.depth) * spec_.lag * 2, Mat());
  wb_.assign(std::size_t(spec_.depth) * spec_.lag * 2, Mat());
  for (int l = 1; l <= spec_.depth; ++l) {
    const int g = group_of_layer_[l - 1];
    for (int k = 1; k <= spec_.lag; ++k) {
      for (int i = 0; i < 2; ++i) {
        Mat a = fixed_a(l, k, i).materialize(n);
        Mat b = fixed_b(l, k, i).materialize(n);
        for (int p = 1; p <= n; ++p) {
          const Vec& u = p1_[storage_index_p1(g, k, i, 2 * p - 1)];
          const Vec& v = p1_[storage_index_p1(g, k, i, 2 * p)];
          if (u.squaredNorm() > 0 && v.squaredNorm() > 0) a.noalias() += u * v.transpose();
        }
        for (int p = n + 1; p <= 2 * n; ++p) {
          const Vec& u = p1_[storage_index_p1(g, k, i, 2 * p - 1)];
          const Vec& v = p1_[storage_index_p1(g, k, i, 2 * p)];
          if (u.squaredNorm() > 0 && v.squaredNorm() > 0) b.noalias() += u * v.transpose();
        }
        const std::size_t at = (std::size_t(l - 1) * spec_.lag + (k - 1)) * 2 + i;
        wa_[at] = std::move(a);
        wb_[at] = std::move(b);
      }
    }
  }
  dirty_ = false;
}

const Mat& ParamSet::weight_a(int layer, int lag, int branch) const {
  if (dirty_) rebuild_cache();
  return wa_[(std::size_t(layer - 1) * spec_.lag + (lag - 1)) * 2 + branch];
}
const Mat& ParamSet::weight_b(int layer, int lag, int branch) const {
  if (dirty_) rebuild_cache();
  return wb_[(std::size_t(layer - 1) * spec_.lag + (lag - 1)) * 2 + branch];
}

Vec ParamSet::bias(int layer, int branch) const {
  const int g = group_of_layer_[layer - 1];
  return p2_[storage_index_p2(g, branch)];
}

std::size_t ParamSet::p1_count() const {
  return std::size_t(spec_.depth) * spec_.lag * 2 * 4 * spec_.width;
}
std::size_t ParamSet::p2_count() const { return std::size_t(spec_.depth) * 2; }

std::vector<ParamIndex> ParamSet::canonical_indices() const {
  std::vector<ParamIndex> out;
  out.reserve(p1_count() + p2_count());
  for (int l = 1; l <= spec_.depth; ++l)
    for (int k = 1; k <= spec_.lag; ++k)
      for (int i = 0; i < 2; ++i)
        for (int s = 1; s <= 4 * spec_.width; ++s) out.push_back({l, k, i, s});
  for (int l = 1; l <= spec_.depth; ++l)
    for (int i = 0; i < 2; ++i) out.push_back({l, 1, i, 0});
  return out;
}

Mat assemble_weight(const Mat& fixed, const std::vector<std::pair<Vec, Vec>>& pairs) {
  if (fixed.rows() != fixed.cols()) throw DimensionError("fixed operator not square");
  Mat out = fixed;
  for (const auto& [u, v] : pairs) {
    if (u.size() != fixed.rows() || v.size() != fixed.rows())
      throw DimensionError("factor length != operator size");
    out.noalias() += u * v.transpose();
  }
  return out;
}

}  // namespace ornet::ornn
