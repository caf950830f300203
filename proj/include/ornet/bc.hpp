// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "ornet/ornn.hpp"
#include "ornet/wave1d.hpp"

namespace ornet::bc {

using wave1d::TimeBasis;
using wave1d::WaveSpeedProfile;

// Discretized time-domain operators in basis coordinates. w_js and w_srj are
// the exact matrix representations of the operator compositions P_T J S and
// S R P_T J (piecewise-polynomial calculus projected once), which keeps the
// corner entries of the connecting operator accurate.
struct BcOperators {
  TimeBasis basis;
  double horizon_T = 1.0;
  Mat r_mat;   // time reversal
  Mat s_mat;   // integration from 0
  Mat j_mat;   // time filter (1/2) int_t^{2T-t}
  Mat w_js;    // P_T o J o S
  Mat w_srj;   // S o R o P_T o J
  Vec phi_t;   // coefficients of Phi_T(t) = (T - t) 1_{[0,T]}

  // multiplication by 1_{[T-s, T]}; s must sit on a cell edge
  Vec window_mask(double s) const;
  Mat window_matrix(double s) const;
};

BcOperators build_bc_operators(const TimeBasis& basis, double horizon_T);

// K = R Lambda W_srj - W_js Lambda; satisfies <K f, h> = <u^f(T), u^h(T)>_{L2(M)}
Mat connecting_operator(const BcOperators& ops, const Mat& lambda);

double blago_inner(const BcOperators& ops, const Mat& lambda, const Vec& f, const Vec& h);
// <f, Phi_T>; equals -<u^f(T), 1> under the d_x u(0,t) = h(t) sign convention
double blago_linear(const BcOperators& ops, const Vec& f);

Vec soft_threshold(const Eigen::Ref<const Vec>& x, double alpha);

struct ControlResult {
  double s = 0.0;
  double alpha = 0.0;
  double step = 0.0;
  Vec coeffs;                      // last iterate f^(m)
  std::vector<double> objective;   // quadratic form - 2 <f,b> + alpha |f|_1 per iteration
  std::vector<double> descent;     // smoothed proximal objective monitored for monotonicity
  int iterations = 0;
};

// ISTA iteration f <- sigma_{alpha step}(f - step P_s K P_s f + step P_s phi);
// step <= 0 selects step_factor / ||sym(P_s K P_s)|| by power iteration
// (the convergence condition admits any factor below 2)
ControlResult ista_control(const BcOperators& ops, const Mat& lambda, double s, double alpha,
                           int iters, double step = -1.0, double step_factor = 0.9);

double volume_estimate(const BcOperators& ops, const ControlResult& result);

// deterministic power-iteration estimate of the spectral norm
double power_norm(const Mat& a, int iters = 300);

struct Reconstruction {
  std::vector<double> s_grid;   // s_0 = 0 .. s_K = T
  std::vector<double> volumes;  // V_alpha(s_j), V(s_0) = 0
  std::vector<double> slopes;   // D_alpha(s_j), j >= 1 (clamped)
  std::vector<double> speeds;   // v_alpha(s_j) = 1 / D_alpha(s_j)
  std::vector<ControlResult> controls;
};

Reconstruction reconstruct_speed(const Mat& lambda, const BcOperators& ops, int k_nodes,
                                 double alpha, int iters, double step = -1.0,
                                 double step_factor = 0.9);

// chi(s_j) by trapezoid accumulation of v; returns (x_j, c(x_j)) pairs
struct EuclideanProfile {
  std::vector<double> x;
  std::vector<double> c;
};
EuclideanProfile travel_to_euclidean(const std::vector<double>& v_samples,
                                     const std::vector<double>& s_grid);

// the control wave source on a simulation grid: -(P_s B f); the sign makes
// u approach +1_{M(s)} under the d_x u(0,t) = h convention
std::vector<double> control_source_samples(const BcOperators& ops, const ControlResult& result,
                                           int time_steps);

// ||u^{-P_s B f}(T) - 1_{M(s)}|| / ||1_{M(s)}|| in L2(M, c^-2 dx)
double control_indicator_error(const BcOperators& ops, const ControlResult& result,
                               const WaveSpeedProfile& c, const wave1d::SimConfig& cfg);

// exact unrolling of l0 ISTA iterations into a general operator recurrent
// network (width n, lag 3, depth 5*l0); forward with h0 = 0 reproduces the
// iterates: layer 5m+5 equals f^(m+1)
struct UnrollResult {
  ornn::ParamSet params;
  double step = 0.0;
  int iterations = 0;
};
UnrollResult unroll_to_ornn(const BcOperators& ops, double s, double alpha, int l0, double step);

}  // namespace ornet::bc
