// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "ornet/ornn.hpp"

namespace ornet::approx {

// scalar function holomorphic on a disk of radius > 1 + radius_margin,
// sampled on the contour |z| = 1 + radius_margin
struct HolomorphicSampler {
  std::function<std::complex<double>(std::complex<double>)> evaluator;
  double radius_margin = 0.5;  // r in (0,1)
  double bound = 1.0;          // sup |q| on the disk
};

// Taylor coefficients a_0..a_degree of q at zero via trapezoid contour
// quadrature on |z| = 1 + r (spectrally accurate on circles)
std::vector<double> taylor_coeffs(const HolomorphicSampler& q, int degree, int quad_points);
inline std::vector<double> taylor_coeffs(const HolomorphicSampler& q, int degree) {
  return taylor_coeffs(q, degree, 16 * (degree + 1));
}

// smallest truncation degree with tail (1+r)^{-l}/r <= eps0
int degree_for_tolerance(double r, double eps0);

// P(Lambda) = A_00 + sum_j A_j0 prod_k (Lambda A_jk); scalar Taylor form when
// coefficients.empty()
struct OperatorPolynomial {
  int degree = 0;
  // coefficients[j] = {A_j0, ..., A_jj}; size degree+1 when present
  std::vector<std::vector<Mat>> coefficients;
  std::vector<double> taylor;  // scalar form a_0..a_degree

  bool scalar_form() const { return coefficients.empty(); }
};

Vec eval_operator_polynomial(const OperatorPolynomial& p, const Mat& lambda, const Vec& x);

// depth-l basic-recurrence network evaluating sum_k a_k Lambda^k h0 via the
// Horner recurrence; call forward with h0 = x. Layer m taps h0 at lag m, so
// the result composes through compose_networks.
ornn::ParamSet neumann_network(const std::vector<double>& coeffs, int width);

// sequential composition: h0 of part j+1 is the output of part j
ornn::ParamSet compose_networks(const std::vector<const ornn::ParamSet*>& parts);

// q(M) for symmetric M via eigendecomposition; test oracle for the
// holomorphic functional calculus
Mat symmetric_matrix_function(const Mat& m, const std::function<double(double)>& f);

// depth/width calculators with the user-supplied constant C
struct DepthWidthBound {
  double depth = 0.0;  // L0
  double width = 0.0;  // W0
};
DepthWidthBound approx_depth_width(double C, int k, int n, int m, double r, double eps,
                                   double g_c1_norm, double g_ck_norm);

}  // namespace ornet::approx
