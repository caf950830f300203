// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"

using namespace ornet;
using namespace ornet::ornn;
using testutil::random_contraction;
using testutil::random_paramset;
using testutil::random_unit;

TEST_CASE("assemble_weight basics") {
  Mat eye = Mat::Identity(3, 3);
  CHECK(assemble_weight(eye, {}) == eye);

  Vec e1 = Vec::Zero(3), e2 = Vec::Zero(3);
  e1[0] = 1.0;
  e2[1] = 1.0;
  Mat outer = assemble_weight(Mat::Zero(3, 3), {{e1, e2}});
  CHECK(outer(0, 1) == 1.0);
  CHECK(outer.cwiseAbs().sum() == 1.0);

  Rng rng(7);
  Mat fixed = rng.normal_mat(3, 3);
  std::vector<std::pair<Vec, Vec>> pairs;
  for (int p = 0; p < 4; ++p) pairs.push_back({rng.normal_vec(3), rng.normal_vec(3)});
  Mat got = assemble_weight(fixed, pairs);
  // naive triple-loop oracle
  Mat want = fixed;
  for (auto& [u, v] : pairs)
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) want(r, c) += u[r] * v[c];
  CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-14);

  Vec bad = Vec::Zero(2);
  CHECK_THROWS_AS(assemble_weight(fixed, {{bad, e2}}), DimensionError);
}

TEST_CASE("leaky_relu componentwise") {
  Vec x(2);
  x << 1.0, -1.0;
  Vec y = leaky_relu(x, 0.0);
  CHECK(y[0] == 1.0);
  CHECK(y[1] == 0.0);
  CHECK((leaky_relu(x, 1.0) - x).norm() == 0.0);
  Vec z(1);
  z << -2.0;
  CHECK(leaky_relu(z, 0.1)[0] == doctest::Approx(-0.2).epsilon(1e-15));
}

TEST_CASE("forward_basic trivial wirings") {
  NetworkSpec spec;
  spec.depth = 1;
  spec.width = 3;
  spec.lag = 1;
  ParamSet zero(spec);
  Vec h0 = random_unit(*new Rng(3), 3, 0.9);  // deliberately non-trivial input
  Mat lam = Mat::Identity(3, 3) * 0.5;
  CHECK(forward_basic(zero, lam, h0).output.norm() == 0.0);

  ParamSet pass(spec);
  pass.set_fixed_a(1, 1, 0, FixedOp::identity());
  CHECK((forward_basic(pass, lam, h0).output - h0).norm() == 0.0);
}

TEST_CASE("forward_basic computes Lambda^2 h0 through fixed B wiring") {
  Rng rng(11);
  NetworkSpec spec;
  spec.depth = 2;
  spec.width = 4;
  spec.lag = 1;
  ParamSet ps(spec);
  ps.set_fixed_b(1, 1, 0, FixedOp::identity());
  ps.set_fixed_b(2, 1, 0, FixedOp::identity());
  for (int rep = 0; rep < 10; ++rep) {
    Mat lam = random_contraction(rng, 4);
    Vec h0 = random_unit(rng, 4);
    Vec got = forward_basic(ps, lam, h0).output;
    Vec want = lam * (lam * h0);
    CHECK((got - want).norm() <= 1e-13);
  }
}

TEST_CASE("forward is deterministic bitwise") {
  Rng rng(5);
  ParamSet ps = random_paramset(rng, 3, 5, 1, 0.1);
  Mat lam = random_contraction(rng, 5);
  Vec h0 = random_unit(rng, 5);
  Vec a = forward_basic(ps, lam, h0).output;
  Vec b = forward_basic(ps, lam, h0).output;
  for (int i = 0; i < 5; ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("forward_general collapses to forward_basic at K=1") {
  Rng rng(13);
  ParamSet ps = random_paramset(rng, 3, 4, 1, 0.2);
  Mat lam = random_contraction(rng, 4);
  Vec h0 = random_unit(rng, 4);
  Vec a = forward_basic(ps, lam, h0).output;
  Vec b = forward_general(ps, lam, h0).output;
  for (int i = 0; i < 4; ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("forward_general lag indexing reaches h0 at l = 2, k = 2") {
  NetworkSpec spec;
  spec.depth = 2;
  spec.width = 3;
  spec.lag = 2;
  ParamSet ps(spec);
  ps.set_fixed_a(2, 2, 0, FixedOp::identity());  // only term: h_2 = h_0
  Rng rng(17);
  Mat lam = random_contraction(rng, 3);
  Vec h0 = random_unit(rng, 3);
  CHECK((forward_general(ps, lam, h0).output - h0).norm() == 0.0);
}

TEST_CASE("truncate_forward equals direct clamp") {
  Rng rng(19);
  CHECK((clamp_via_relu((Vec(2) << 0.5, -0.3).finished(), 1.0) -
         (Vec(2) << 0.5, -0.3).finished())
            .norm() <= 1e-15);
  Vec big(2);
  big << 7.0, -9.0;
  Vec clipped = clamp_via_relu(big, 1.0);
  CHECK(clipped[0] == 1.0);
  CHECK(clipped[1] == -1.0);
  for (int rep = 0; rep < 1000; ++rep) {
    Vec x = 3.0 * rng.normal_vec(6);
    const double m = rng.uniform(0.0, 2.0);
    Vec got = clamp_via_relu(x, m);
    for (int i = 0; i < 6; ++i) {
      const double ulps = 4.0 * 2.220446049250313e-16 * std::max(m, std::abs(x[i]));
      CHECK(std::abs(got[i] - std::clamp(x[i], -m, m)) <= ulps);
    }
  }
}

TEST_CASE("truncated output respects the sup bound through the network") {
  Rng rng(23);
  ParamSet ps = random_paramset(rng, 3, 4);
  const double m = 0.05;  // tight enough to clip
  for (int rep = 0; rep < 20; ++rep) {
    Vec out = truncate_forward(ps, random_contraction(rng, 4), random_unit(rng, 4), m);
    CHECK(out.cwiseAbs().maxCoeff() <= m + 1e-15);
  }
}

TEST_CASE("regularizer closed forms and brute force") {
  NetworkSpec spec;
  spec.depth = 2;
  spec.width = 3;
  spec.lag = 1;
  ParamSet zero(spec);
  CHECK(regularizer(zero) == 0.0);

  // one factor pair with both norms sqrt(sigma) contributes sqrt(sigma)
  const double sigma = 0.49;
  ParamSet one(spec);
  Vec u = Vec::Zero(3), v = Vec::Zero(3);
  u[0] = std::sqrt(sigma);
  v[1] = std::sqrt(sigma);
  one.set_vector({1, 1, 0, 1}, u);
  one.set_vector({1, 1, 0, 2}, v);
  CHECK(regularizer(one) == doctest::Approx(std::sqrt(sigma)).epsilon(1e-14));
  // and it equals the Schatten-1/2 half-power of the assembled rank-1 weight
  CHECK(std::pow(schatten_seminorm(one.weight_a(1, 1, 0), 0.5), 0.5) ==
        doctest::Approx(std::sqrt(sigma)).epsilon(1e-12));

  Rng rng(29);
  ParamSet ps = random_paramset(rng, 3, 4);
  double brute = 0.0;
  for (int l = 1; l <= 3; ++l)
    for (int i = 0; i < 2; ++i)
      for (int s = 1; s <= 16; ++s) brute += ps.vector({l, 1, i, s}).norm();
  brute *= 0.5;
  CHECK(regularizer(ps) == doctest::Approx(brute).epsilon(1e-14));
  // per-layer split adds back up
  CHECK(regularizer_layer(ps, 1) + regularizer_layer(ps, 2) + regularizer_layer(ps, 3) ==
        doctest::Approx(regularizer(ps)).epsilon(1e-14));
}

TEST_CASE("regularizer is convex in each parameter vector") {
  Rng rng(31);
  for (int rep = 0; rep < 40; ++rep) {
    ParamSet a = random_paramset(rng, 2, 3);
    ParamSet b = a;
    const ParamIndex ix{1 + int(rng.below(2)), 1, int(rng.below(2)), 1 + int(rng.below(12))};
    Vec va = random_unit(rng, 3, 0.9);
    Vec vb = random_unit(rng, 3, 0.9);
    a.set_vector(ix, va);
    b.set_vector(ix, vb);
    ParamSet mid = a;
    mid.set_vector(ix, 0.5 * (va + vb));
    CHECK(regularizer(mid) <= 0.5 * regularizer(a) + 0.5 * regularizer(b) + 1e-12);
  }
}

TEST_CASE("operator norms are dominated by the per-layer regularizer") {
  Rng rng(37);
  for (int rep = 0; rep < 30; ++rep) {
    ParamSet ps = random_paramset(rng, 1, 4);
    const double r = regularizer_layer_lag(ps, 1, 1);
    for (int i = 0; i < 2; ++i) {
      // trained parts only (fixed parts are zero here)
      const double na = operator_norm(ps.weight_a(1, 1, i));
      const double nb = operator_norm(ps.weight_b(1, 1, i));
      CHECK(na + nb <= r + 1e-12);
    }
  }
}

TEST_CASE("schatten_seminorm closed forms") {
  CHECK(schatten_seminorm(Mat::Identity(4, 4), 0.5) == doctest::Approx(16.0).epsilon(1e-12));
  Rng rng(41);
  Vec u = random_unit(rng, 5), v = random_unit(rng, 5);
  Mat rank1 = u * v.transpose();
  for (double p : {0.5, 1.0, 2.0})
    CHECK(schatten_seminorm(rank1, p) == doctest::Approx(1.0).epsilon(1e-10));

  for (int rep = 0; rep < 5; ++rep) {
    Mat a = rng.normal_mat(4, 4);
    auto sv = testutil::jacobi_singular_values(a);
    double want = 0.0;
    for (double s : sv) want += std::sqrt(s);
    want = want * want;
    CHECK(schatten_seminorm(a, 0.5) == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("sparsity_count") {
  NetworkSpec spec;
  spec.depth = 2;
  spec.width = 3;
  spec.lag = 1;
  ParamSet zero(spec);
  auto c0 = sparsity_count(zero, 0.0);
  CHECK(c0.total == 0);
  CHECK(c0.p1 == 0);

  ParamSet biases(spec);
  biases.set_vector({1, 1, 0, 0}, random_unit(*new Rng(1), 3, 0.5));
  biases.set_vector({2, 1, 1, 0}, random_unit(*new Rng(2), 3, 0.5));
  auto cb = sparsity_count(biases, 1e-12);
  CHECK(cb.total == 2);
  CHECK(cb.p1 == 0);

  Rng rng(43);
  ParamSet sparse(spec);
  int placed = 0;
  while (placed < 7) {
    ParamIndex ix{1 + int(rng.below(2)), 1, int(rng.below(2)), 1 + int(rng.below(12))};
    if (sparse.vector(ix).norm() > 0) continue;
    sparse.set_vector(ix, random_unit(rng, 3, 0.5));
    ++placed;
  }
  CHECK(sparsity_count(sparse, 1e-9).p1 == 7);
}

TEST_CASE("lipschitz_bound closed forms") {
  NetworkSpec spec;
  spec.depth = 2;
  spec.width = 3;
  spec.lag = 1;
  ParamSet zero(spec);
  CHECK(lipschitz_bound(zero, {1, 1, 0, 0}) ==
        doctest::Approx(std::pow(4.0, 3)).epsilon(1e-14));
  // P1 index whose partner is zero
  ParamSet ps(spec);
  ps.set_vector({1, 1, 0, 1}, random_unit(*new Rng(3), 3, 0.5));
  CHECK(lipschitz_bound(ps, {1, 1, 0, 1}) == 0.0);  // partner (slot 2) is zero
  CHECK(lipschitz_bound(ps, {1, 1, 0, 2}) > 0.0);
  CHECK_THROWS_AS(lipschitz_bound(ps, {1, 1, 0, 99}), IndexError);
}

TEST_CASE("finite-difference probes stay below the lipschitz bound") {
  Rng rng(47);
  ParamSet ps = random_paramset(rng, 2, 3);
  Mat lam = random_contraction(rng, 3, 1.0);
  Vec h0 = random_unit(rng, 3, 1.0);
  const Vec base = forward_basic(ps, lam, h0).output;
  const double eps = 1e-5;
  for (int rep = 0; rep < 100; ++rep) {
    ParamIndex ix{1 + int(rng.below(2)), 1, int(rng.below(2)), int(rng.below(13))};
    if (ix.slot == 0 && ix.lag != 1) continue;
    const double bound = lipschitz_bound(ps, ix);
    Vec dir = random_unit(rng, 3);
    ParamSet bumped = ps;
    Vec v = ps.vector(ix) + eps * dir;
    if (v.norm() > 1.0) continue;  // keep inside Theta0 where the bound applies
    bumped.set_vector(ix, v);
    const double diff = (forward_basic(bumped, lam, h0).output - base).norm() / eps;
    CHECK(diff <= bound * (1.0 + 1e-6) + 1e-12);
  }
}

TEST_CASE("piecewise polynomial structure along constant-pattern segments") {
  Rng rng(53);
  int checked = 0;
  while (checked < 12) {
    const int n = 3, L = 3;
    ParamSet ps = random_paramset(rng, L, n, 1, 0.0);
    Mat lam0 = random_contraction(rng, n, 0.8);
    Mat dir = rng.normal_mat(n, n);
    dir /= operator_norm(dir);
    Vec h0 = random_unit(rng, n);

    double t1 = 0.2;
    auto pattern = [&](double t) {
      auto tr = forward_basic(ps, lam0 + t * dir, h0);
      std::vector<int> sig;
      for (const auto& s : tr.signs)
        for (int i = 0; i < s.size(); ++i) sig.push_back(s[i]);
      return sig;
    };
    // shrink until the activation pattern is constant across the sample nodes
    const int nodes = L + 2;
    std::vector<double> ts(nodes);
    bool constant = false;
    for (int shrink = 0; shrink < 12 && !constant; ++shrink, t1 *= 0.5) {
      for (int i = 0; i < nodes; ++i) ts[i] = t1 * double(i) / (nodes - 1);
      constant = true;
      auto ref = pattern(ts[0]);
      for (int i = 1; i < nodes && constant; ++i) constant = pattern(ts[i]) == ref;
    }
    if (!constant) continue;

    for (int coord = 0; coord < n; ++coord) {
      std::vector<double> fs(nodes);
      double scale = 0.0;
      for (int i = 0; i < nodes; ++i) {
        fs[i] = forward_basic(ps, lam0 + ts[i] * dir, h0).output[coord];
        scale = std::max(scale, std::abs(fs[i]));
      }
      // degree <= L, so the (L+1)-th divided difference vanishes
      const double dd = testutil::divided_difference(ts, fs);
      const double span = ts.back() - ts.front();
      CHECK(std::abs(dd) * std::pow(span, L + 1) <= 1e-8 * (scale + 1.0));
    }
    ++checked;
  }
}

TEST_CASE("non-finite intermediates raise a numerical error") {
  NetworkSpec spec;
  spec.depth = 400;
  spec.width = 2;
  spec.lag = 1;
  spec.unconstrained = true;
  ParamSet ps(spec);
  for (int l = 1; l <= 400; ++l)
    ps.set_fixed_a(l, 1, 0, FixedOp::scaled_identity(10.0));  // amplifies by 10 per layer
  Vec h0(2);
  h0 << 1.0, 1.0;
  CHECK_THROWS_AS(forward_basic(ps, Mat::Zero(2, 2), h0), NumericalError);
}
