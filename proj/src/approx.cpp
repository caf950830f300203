// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "ornet/approx.hpp"

#include <Eigen/Eigenvalues>

namespace ornet::approx {

std::vector<double> taylor_coeffs(const HolomorphicSampler& q, int degree, int quad_points) {
  require(degree >= 0, "degree must be nonnegative");
  require(q.radius_margin > 0.0 && q.radius_margin < 1.0, "radius margin outside (0,1)");
  require(quad_points >= 4 * (degree + 1), "too few contour quadrature points");
  const double rho = 1.0 + q.radius_margin;
  const int N = quad_points;

  std::vector<std::complex<double>> samples(N);
  for (int m = 0; m < N; ++m) {
    const double phi = 2.0 * M_PI * m / N;
    const std::complex<double> z = rho * std::complex<double>(std::cos(phi), std::sin(phi));
    samples[m] = q.evaluator(z);
    if (!std::isfinite(samples[m].real()) || !std::isfinite(samples[m].imag()))
      throw NumericalError("holomorphic evaluator returned a non-finite value");
  }

  // a_k = (1/(N rho^k)) sum_m q(rho e^{i phi_m}) e^{-i k phi_m}
  std::vector<double> a(degree + 1);
  for (int k = 0; k <= degree; ++k) {
    std::complex<double> acc = 0.0;
    for (int m = 0; m < N; ++m) {
      const double phi = 2.0 * M_PI * m * k / N;
      acc += samples[m] * std::complex<double>(std::cos(phi), -std::sin(phi));
    }
    a[k] = acc.real() / (N * std::pow(rho, k));
  }
  return a;
}

int degree_for_tolerance(double r, double eps0) {
  if (!(eps0 > 0.0 && eps0 < r && r < 1.0)) throw DomainError("need 0 < eps0 < r < 1");
  return 1 + int(std::floor(std::log(1.0 / (r * eps0)) / std::log1p(r)));
}

Vec eval_operator_polynomial(const OperatorPolynomial& p, const Mat& lambda, const Vec& x) {
  const Eigen::Index n = lambda.rows();
  if (lambda.cols() != n || x.size() != n) throw DimensionError("operator polynomial dimensions");
  if (p.scalar_form()) {
    require(int(p.taylor.size()) == p.degree + 1, "taylor coefficient count");
    // Horner: t = a_l x; t = Lambda t + a_k x
    Vec t = p.taylor[p.degree] * x;
    for (int k = p.degree - 1; k >= 0; --k) t = lambda * t + p.taylor[k] * x;
    return t;
  }
  require(int(p.coefficients.size()) == p.degree + 1, "coefficient block count");
  for (int j = 0; j <= p.degree; ++j) {
    require(int(p.coefficients[j].size()) == j + 1, "coefficient row length");
    for (const Mat& a : p.coefficients[j])
      if (a.rows() != n || a.cols() != n) throw DimensionError("coefficient block size");
  }
  Vec out = p.coefficients[0][0] * x;
  for (int j = 1; j <= p.degree; ++j) {
    Vec t = p.coefficients[j][j] * x;  // rightmost factor acts first
    for (int k = j - 1; k >= 1; --k) {
      t = lambda * t;
      t = p.coefficients[j][k] * t;
    }
    t = lambda * t;
    out += p.coefficients[j][0] * t;
  }
  return out;
}

ornn::ParamSet neumann_network(const std::vector<double>& coeffs, int width) {
  require(!coeffs.empty(), "empty coefficient list");
  const int l = int(coeffs.size()) - 1;
  const int n = width;

  if (l == 0) {
    // constant polynomial a_0 x: a single pass-through-scaled layer
    ornn::NetworkSpec spec;
    spec.depth = 1;
    spec.width = n;
    spec.lag = 1;
    ornn::ParamSet ps(spec);
    ps.set_fixed_a(1, 1, 0, ornn::FixedOp::scaled_identity(coeffs[0]));
    return ps;
  }

  ornn::NetworkSpec spec;
  spec.depth = l;
  spec.width = n;
  spec.lag = l;  // layer m reaches h0 at lag m
  spec.leak = 0.0;
  for (double a : coeffs)
    if (std::abs(a) > 1.0) spec.unconstrained = true;
  ornn::ParamSet ps(spec);

  // h_m = a_{l-m} h0 + Lambda h_{m-1}, seeded by h_1 = a_{l-1} h0 + a_l Lambda h0
  ps.set_fixed_a(1, 1, 0, ornn::FixedOp::scaled_identity(coeffs[l - 1]));
  ps.set_fixed_b(1, 1, 0, ornn::FixedOp::scaled_identity(coeffs[l]));
  for (int m = 2; m <= l; ++m) {
    ps.set_fixed_b(m, 1, 0, ornn::FixedOp::identity());
    if (coeffs[l - m] != 0.0)
      ps.set_fixed_a(m, m, 0, ornn::FixedOp::scaled_identity(coeffs[l - m]));
  }
  return ps;
}

ornn::ParamSet compose_networks(const std::vector<const ornn::ParamSet*>& parts) {
  if (parts.empty()) throw DomainError("cannot compose an empty sequence");
  const int n = parts[0]->width();
  int depth = 0, max_lag = 1;
  double leak = parts[0]->leak();
  bool unconstrained = false;
  for (const auto* p : parts) {
    if (p->width() != n) throw DimensionError("composed parts must share the width");
    require(p->leak() == leak, "composed parts must share the activation leak");
    depth += p->depth();
    unconstrained = unconstrained || p->spec().unconstrained;
  }
  for (const auto* p : parts) max_lag = std::max(max_lag, p->lag());

  ornn::NetworkSpec spec;
  spec.depth = depth;
  spec.width = n;
  spec.lag = max_lag;
  spec.leak = leak;
  spec.unconstrained = unconstrained;
  ornn::ParamSet out(spec);

  int base = 0;
  for (const auto* p : parts) {
    for (int l = 1; l <= p->depth(); ++l) {
      const int gl = base + l;
      for (int k = 1; k <= p->lag(); ++k) {
        if (k > l && base == 0) continue;       // taps before h0: zero anyway
        if (k > l && base > 0) continue;        // semantics require lags within the part
        out.set_fixed_a(gl, k, 0, p->fixed_a(l, k, 0));
        out.set_fixed_a(gl, k, 1, p->fixed_a(l, k, 1));
        out.set_fixed_b(gl, k, 0, p->fixed_b(l, k, 0));
        out.set_fixed_b(gl, k, 1, p->fixed_b(l, k, 1));
        for (int i = 0; i < 2; ++i)
          for (int s = 1; s <= 4 * n; ++s) {
            const Vec& v = p->vector({l, k, i, s});
            if (v.squaredNorm() > 0.0) out.set_vector({gl, k, i, s}, v);
          }
      }
      for (int i = 0; i < 2; ++i) {
        Vec b = p->bias(l, i);
        if (b.squaredNorm() > 0.0) out.set_vector({gl, 1, i, 0}, b);
      }
    }
    base += p->depth();
  }
  return out;
}

Mat symmetric_matrix_function(const Mat& m, const std::function<double(double)>& f) {
  if ((m - m.transpose()).norm() > 1e-12 * (1.0 + m.norm()))
    throw DomainError("matrix function oracle requires a symmetric matrix");
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  Vec d = es.eigenvalues();
  for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = f(d[i]);
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

DepthWidthBound approx_depth_width(double C, int k, int n, int m, double r, double eps,
                                   double g_c1_norm, double g_ck_norm) {
  require(C > 0.0 && k >= 1 && n >= 1 && m >= 1, "bad calculator inputs");
  require(r > 0.0 && r < 1.0 && eps > 0.0 && eps < 1.0, "need r, eps in (0,1)");
  const double pk = std::pow(4.0, k + 1);
  DepthWidthBound b;
  b.depth = C * (std::log(4.0 * g_c1_norm / (r * eps)) + std::log(pk * g_ck_norm / eps) + 1.0);
  b.width = C * double(m) * double(n) * std::pow(eps / (pk * g_ck_norm), -double(n) / k) *
            (std::log(pk * g_ck_norm / eps) + 1.0);
  return b;
}

}  // namespace ornet::approx
