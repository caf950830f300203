// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "ornet/common.hpp"

namespace ornet::ornn {

// Parameter address within the index set P = P1 u P2.
// layer in 1..L, lag in 1..K, branch in {0,1}, slot in 0..4n.
// slot 0 is the bias (P2, only lag == 1); slots 1..4n hold the rank-1
// factors: pair p = (slot+1)/2, pairs 1..n feed the A weight, pairs
// n+1..2n feed the B weight.
struct ParamIndex {
  int layer = 1;
  int lag = 1;
  int branch = 0;
  int slot = 0;
};

enum class FixedKind { Zero, Identity, ScaledIdentity, Dense };

// Fixed (non-trained) part of a weight, A^{(0)} or B^{(0)}.
struct FixedOp {
  FixedKind kind = FixedKind::Zero;
  double scale = 1.0;  // ScaledIdentity factor
  Mat dense;           // Dense payload

  static FixedOp zero() { return {}; }
  static FixedOp identity() { return {FixedKind::Identity, 1.0, {}}; }
  static FixedOp scaled_identity(double s) { return {FixedKind::ScaledIdentity, s, {}}; }
  static FixedOp from_dense(Mat m) { return {FixedKind::Dense, 1.0, std::move(m)}; }

  bool is_zero() const { return kind == FixedKind::Zero; }
  double norm(int) const;
  Mat materialize(int n) const;
  // y += op * x
  void apply_add(const Eigen::Ref<const Vec>& x, Vec& y) const;
  // y += op^T * x
  void apply_transpose_add(const Eigen::Ref<const Vec>& x, Vec& y) const;
};

struct NetworkSpec {
  int depth = 1;   // L
  int width = 1;   // n
  int lag = 1;     // K
  double leak = 0.0;
  std::optional<double> truncation_bound;
  bool unconstrained = false;  // norm caps not enforced (rewrites, embeddings, unrollings)
};

// Trainable parameters theta plus the fixed operators, stored per shared
// group so tied layers are identical by construction.
class ParamSet {
 public:
  ParamSet() = default;
  // identity grouping (every layer independent)
  explicit ParamSet(NetworkSpec spec);
  // tied layers: group_of_layer[l-1] in 0..G-1, must be surjective
  ParamSet(NetworkSpec spec, std::vector<int> group_of_layer);

  const NetworkSpec& spec() const { return spec_; }
  int depth() const { return spec_.depth; }
  int width() const { return spec_.width; }
  int lag() const { return spec_.lag; }
  double leak() const { return spec_.leak; }
  int groups() const { return num_groups_; }
  int group_of_layer(int layer) const { return group_of_layer_[layer - 1]; }
  const std::vector<int>& grouping() const { return group_of_layer_; }

  // trained vectors; setting a vector with ||v|| > 1 throws unless the
  // network is flagged unconstrained
  const Vec& vector(const ParamIndex& ix) const;
  void set_vector(const ParamIndex& ix, Vec v);

  const FixedOp& fixed_a(int layer, int lag, int branch) const;
  const FixedOp& fixed_b(int layer, int lag, int branch) const;
  void set_fixed_a(int layer, int lag, int branch, FixedOp op);
  void set_fixed_b(int layer, int lag, int branch, FixedOp op);

  // assembled dense weights, cached until a vector mutates
  const Mat& weight_a(int layer, int lag, int branch) const;
  const Mat& weight_b(int layer, int lag, int branch) const;
  Vec bias(int layer, int branch) const;  // zero vector when unset

  void set_leak(double eta) { spec_.leak = eta; }
  void set_truncation(std::optional<double> m) { spec_.truncation_bound = m; }
  void mark_unconstrained() { spec_.unconstrained = true; }

  // number of parameter indices
  std::size_t p1_count() const;  // = L*K*2*4n
  std::size_t p2_count() const;  // = 2L

  // canonical P ordering (P1: layer asc, lag asc, branch asc, slot asc;
  // then P2: layer asc, branch asc)
  std::vector<ParamIndex> canonical_indices() const;

  // iterate distinct storage slots (one per group) for training updates
  std::size_t storage_p1_size() const { return p1_.size(); }
  std::size_t storage_p2_size() const { return p2_.size(); }
  Vec& storage_p1(std::size_t i) { dirty_ = true; return p1_[i]; }
  const Vec& storage_p1(std::size_t i) const { return p1_[i]; }
  Vec& storage_p2(std::size_t i) { dirty_ = true; return p2_[i]; }
  const Vec& storage_p2(std::size_t i) const { return p2_[i]; }
  std::size_t storage_index_p1(int group, int lag, int branch, int slot) const;
  std::size_t storage_index_p2(int group, int branch) const;
  void invalidate_cache() { dirty_ = true; }

 private:
  void check_index(const ParamIndex& ix, bool bias_ok) const;
  void rebuild_cache() const;

  NetworkSpec spec_;
  int num_groups_ = 0;
  std::vector<int> group_of_layer_;
  std::vector<Vec> p1_;       // [group][lag][branch][slot] flattened
  std::vector<Vec> p2_;       // [group][branch]
  std::vector<FixedOp> fa_, fb_;  // per (layer, lag, branch)
  mutable bool dirty_ = true;
  mutable std::vector<Mat> wa_, wb_;  // assembled cache per (group, lag, branch)
};

// ---- elementary operations ----

// fixed + sum of outer products u_p v_p^T over the given factor pairs
Mat assemble_weight(const Mat& fixed, const std::vector<std::pair<Vec, Vec>>& pairs);

Vec leaky_relu(const Eigen::Ref<const Vec>& x, double eta);

struct ForwardTrace {
  Vec output;
  std::vector<Vec> layers;            // h_1..h_L (h0 not stored)
  std::vector<Vec> act_args;          // activation arguments z_l
  std::vector<Eigen::VectorXi> signs; // +1 / -1 pattern (0 maps to -1)
};

ForwardTrace forward_general(const ParamSet& params, const Mat& lambda, const Vec& h0);
// K must equal 1
ForwardTrace forward_basic(const ParamSet& params, const Mat& lambda, const Vec& h0);

// componentwise clamp to [-m, m] realized by the prescribed two ReLU layers
Vec clamp_via_relu(const Eigen::Ref<const Vec>& x, double m);
Vec truncate_forward(const ParamSet& params, const Mat& lambda, const Vec& h0, double m);

// ---- transforms ----

struct WidenResult {
  ParamSet wide;        // basic (K = 1) network of width n*K
  int original_width = 0;
  Mat widen_lambda(const Mat& lambda) const;  // diag(Lambda, ..., Lambda)
  Vec widen_h0(const Vec& h0) const;          // (h0, 0, ..., 0)
  Vec project(const Vec& wide_out) const;     // Pi_n
};
WidenResult widen_general_to_basic(const ParamSet& params);

// leaky (eta in (0,1)) -> standard ReLU network computing the same function;
// combined affine parts land in dense fixed slots, so the result is flagged
// unconstrained
ParamSet rewrite_leaky_to_standard(const ParamSet& params, double eta);

struct StdLayer {
  Mat skip;    // A^{l,0}
  Mat weight;  // A^{l,1}
  Vec bias;    // b^l
};
struct EmbedResult {
  ParamSet params;  // general network, K = 1
  Mat lambda;       // diag(lambda_vec)
  Vec h0;           // ones
};
// standard net h_l = skip*h + phi(bias + weight*h), h_0 = lambda_vec
EmbedResult embed_standard_nn(const std::vector<StdLayer>& std_layers, const Vec& lambda_vec,
                              double eta = 0.0);
Vec standard_nn_forward(const std::vector<StdLayer>& std_layers, const Vec& x, double eta = 0.0);

// ---- measures ----

double regularizer(const ParamSet& params);                   // R(theta)
double regularizer_layer(const ParamSet& params, int layer);  // R(theta^l)
double regularizer_layer_lag(const ParamSet& params, int layer, int lag);

double schatten_seminorm(const Mat& a, double p);

struct SparsityCount {
  long total = 0;  // N: nonzero over P1 u P2
  long p1 = 0;     // N1: nonzero over P1
};
SparsityCount sparsity_count(const ParamSet& params, double tol);

double lipschitz_bound(const ParamSet& params, const ParamIndex& ix);

// ---- reverse-mode gradients ----

struct ParamGrad {
  std::vector<Vec> p1;  // same storage layout as ParamSet (per group)
  std::vector<Vec> p2;
  Vec h0;

  void add_scaled(const ParamGrad& other, double s);
  void scale(double s);
};

ParamGrad zero_grad_like(const ParamSet& params);

// d(out_grad . f_theta(Lambda)) / d theta, reusing a forward trace.
// When truncation_bound is set the clamp derivative is applied to out_grad.
ParamGrad backward(const ParamSet& params, const Mat& lambda, const Vec& h0,
                   const ForwardTrace& trace, const Vec& out_grad);

}  // namespace ornet::ornn
