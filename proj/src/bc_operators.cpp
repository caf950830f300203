// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "ornet/bc.hpp"

namespace ornet::bc {

using wave1d::PiecewisePoly;

Vec BcOperators::window_mask(double s) const {
  require(s >= 0.0 && s <= horizon_T + 1e-12, "window time outside [0, T]");
  const double lo = horizon_T - s;
  Vec mask = Vec::Zero(basis.size());
  bool edge_found = s == 0.0;
  for (int i = 0; i <= basis.size(); ++i)
    if (std::abs(basis.edges()[i] - lo) < 1e-10) edge_found = true;
  if (!edge_found) throw DomainError("window edge T - s must lie on a basis cell edge");
  for (int i = 0; i < basis.size(); ++i)
    if (basis.edges()[i] >= lo - 1e-10 && basis.edges()[i + 1] <= horizon_T + 1e-10)
      mask[i] = 1.0;
  return mask;
}

Mat BcOperators::window_matrix(double s) const { return window_mask(s).asDiagonal(); }

BcOperators build_bc_operators(const TimeBasis& basis, double horizon_T) {
  require(std::abs(basis.horizon() - horizon_T) < 1e-12, "basis horizon must be 2T");
  const int n = basis.size();
  const double T = horizon_T;
  const double two_t = 2.0 * T;

  BcOperators ops;
  ops.basis = basis;
  ops.horizon_T = T;
  ops.r_mat = Mat::Zero(n, n);
  ops.s_mat = Mat::Zero(n, n);
  ops.w_js = Mat::Zero(n, n);
  ops.w_srj = Mat::Zero(n, n);

  auto apply_j = [&](const PiecewisePoly& g) {
    const PiecewisePoly big_g = g.antiderivative();
    return (big_g.reflected() - big_g).scaled(0.5);
  };

  for (int j = 0; j < n; ++j) {
    const PiecewisePoly psi = basis.basis_function(j);
    const PiecewisePoly s_psi = psi.antiderivative();
    ops.s_mat.col(j) = basis.analyze(s_psi);

    // W_JS column: window_T(J(S psi))
    ops.w_js.col(j) = basis.analyze(apply_j(s_psi).windowed(0.0, T));
    // W_SRJ column: S(R(window_T(J psi)))
    ops.w_srj.col(j) =
        basis.analyze(apply_j(psi).windowed(0.0, T).reflected().antiderivative());

    // reversal permutation; the mirror-symmetric cell layout makes it exact
    require(std::abs(basis.widths()[j] - basis.widths()[n - 1 - j]) < 1e-14,
            "basis layout must be mirror symmetric under t -> 2T - t");
    ops.r_mat(n - 1 - j, j) = 1.0;
  }
  ops.j_mat = 0.5 * (ops.r_mat * ops.s_mat - ops.s_mat);

  PiecewisePoly phi({0.0, T, two_t}, {{T, -1.0}, {0.0}});
  ops.phi_t = basis.analyze(phi);
  return ops;
}

Mat connecting_operator(const BcOperators& ops, const Mat& lambda) {
  const int n = ops.basis.size();
  if (lambda.rows() != n || lambda.cols() != n)
    throw DimensionError("data operator does not match the basis size");
  return ops.r_mat * lambda * ops.w_srj - ops.w_js * lambda;
}

double blago_inner(const BcOperators& ops, const Mat& lambda, const Vec& f, const Vec& h) {
  const int n = ops.basis.size();
  if (f.size() != n || h.size() != n) throw DimensionError("coefficient vectors must have size n");
  return (connecting_operator(ops, lambda) * f).dot(h);
}

double blago_linear(const BcOperators& ops, const Vec& f) {
  if (f.size() != ops.phi_t.size()) throw DimensionError("coefficient vector must have size n");
  return f.dot(ops.phi_t);
}

Vec soft_threshold(const Eigen::Ref<const Vec>& x, double alpha) {
  require(alpha >= 0.0, "threshold must be nonnegative");
  return (x.array() - alpha).max(0.0).matrix() - ((-x).array() - alpha).max(0.0).matrix();
}

double power_norm(const Mat& a, int iters) {
  const Eigen::Index n = a.rows();
  Vec v = Vec::Ones(n) / std::sqrt(double(n));
  double norm = 0.0;
  // iterate on a^T a to cover non-symmetric inputs
  for (int k = 0; k < iters; ++k) {
    Vec w = a.transpose() * (a * v);
    norm = std::sqrt(w.norm());
    if (w.norm() == 0.0) return 0.0;
    v = w / w.norm();
  }
  return norm;
}

ControlResult ista_control(const BcOperators& ops, const Mat& lambda, double s, double alpha,
                           int iters, double step, double step_factor) {
  require(alpha >= 0.0, "alpha must be nonnegative");
  require(iters >= 1, "need at least one iteration");
  const int n = ops.basis.size();
  const Vec mask = ops.window_mask(s);
  const Mat k_op = connecting_operator(ops, lambda);
  const Mat q = mask.asDiagonal() * k_op * mask.asDiagonal();
  const Vec b = mask.cwiseProduct(ops.phi_t);
  const Mat q_sym = 0.5 * (q + q.transpose());

  if (step <= 0.0) {
    require(step_factor > 0.0 && step_factor < 2.0, "step factor outside (0,2)");
    const double norm = power_norm(q_sym);
    step = norm > 0.0 ? step_factor / norm : 1.0;
  }
  if (step * power_norm(q) >= 2.0 + 1e-9)
    throw StepSizeError("step violates the convergence condition step ||Q|| < 2");

  ControlResult res;
  res.s = s;
  res.alpha = alpha;
  res.step = step;
  res.iterations = iters;
  res.objective.reserve(iters);
  res.descent.reserve(iters);

  Vec f = Vec::Zero(n);
  const double thr = alpha * step;
  int bad_streak = 0;
  double prev_descent = std::numeric_limits<double>::infinity();
  for (int m = 0; m < iters; ++m) {
    Vec x = f - step * (q * f) + step * b;
    f = soft_threshold(x, thr);
    const double quad = f.dot(q * f);
    const double lin = f.dot(b);
    res.objective.push_back(quad - 2.0 * lin + alpha * f.lpNorm<1>());
    const double desc = 0.5 * f.dot(q_sym * f) - lin + alpha * f.lpNorm<1>();
    res.descent.push_back(desc);
    if (desc > prev_descent + 1e-12) {
      if (++bad_streak >= 10)
        throw StepSizeError("proximal objective increased for 10 consecutive iterations");
    } else {
      bad_streak = 0;
    }
    prev_descent = desc;
  }
  res.coeffs = std::move(f);
  return res;
}

double volume_estimate(const BcOperators& ops, const ControlResult& result) {
  return result.coeffs.dot(ops.phi_t);
}

Reconstruction reconstruct_speed(const Mat& lambda, const BcOperators& ops, int k_nodes,
                                 double alpha, int iters, double step, double step_factor) {
  require(k_nodes >= 2, "need at least two reconstruction nodes");
  const double T = ops.horizon_T;
  Reconstruction rec;
  rec.s_grid.resize(k_nodes + 1);
  rec.volumes.assign(k_nodes + 1, 0.0);
  for (int j = 0; j <= k_nodes; ++j) rec.s_grid[j] = T * double(j) / k_nodes;

  for (int j = 1; j <= k_nodes; ++j) {
    ControlResult ctl = ista_control(ops, lambda, rec.s_grid[j], alpha, iters, step, step_factor);
    rec.volumes[j] = volume_estimate(ops, ctl);
    rec.controls.push_back(std::move(ctl));
  }

  double vmax = 0.0;
  for (double v : rec.volumes) vmax = std::max(vmax, std::abs(v));
  if (vmax == 0.0) throw ReconstructionError("all control volumes vanish");
  const double eps_d = 1e-6 * vmax / T;

  rec.slopes.resize(k_nodes);
  rec.speeds.resize(k_nodes);
  for (int j = 1; j <= k_nodes; ++j) {
    const double d = (rec.volumes[j] - rec.volumes[j - 1]) / (rec.s_grid[j] - rec.s_grid[j - 1]);
    rec.slopes[j - 1] = std::max(d, eps_d);
    rec.speeds[j - 1] = 1.0 / rec.slopes[j - 1];
  }
  return rec;
}

EuclideanProfile travel_to_euclidean(const std::vector<double>& v_samples,
                                     const std::vector<double>& s_grid) {
  require(v_samples.size() == s_grid.size(), "speed samples must align with the s grid");
  for (double v : v_samples) require(v > 0.0, "speeds must be positive");
  EuclideanProfile out;
  out.x.resize(s_grid.size());
  out.c = v_samples;
  out.x[0] = 0.0;
  for (std::size_t j = 1; j < s_grid.size(); ++j)
    out.x[j] = out.x[j - 1] +
               0.5 * (v_samples[j] + v_samples[j - 1]) * (s_grid[j] - s_grid[j - 1]);
  return out;
}

std::vector<double> control_source_samples(const BcOperators& ops, const ControlResult& result,
                                           int time_steps) {
  const Vec windowed = ops.window_mask(result.s).cwiseProduct(result.coeffs);
  const Mat v = wave1d::basis_on_grid(ops.basis, time_steps);
  std::vector<double> h(time_steps + 1, 0.0);
  for (int k = 0; k <= time_steps; ++k) {
    double acc = 0.0;
    for (int j = 0; j < ops.basis.size(); ++j) acc += windowed[j] * v(j, k);
    h[k] = -acc;
  }
  return h;
}

double control_indicator_error(const BcOperators& ops, const ControlResult& result,
                               const WaveSpeedProfile& c, const wave1d::SimConfig& cfg) {
  const std::vector<double> h = control_source_samples(ops, result, cfg.time_steps);
  const wave1d::BoundaryRun run = wave1d::solve_wave_boundary(c, h, cfg);
  const wave1d::TravelTime tt = wave1d::travel_time(c);
  const double chi_s = tt.chi(result.s);
  std::vector<double> ind(c.x.size());
  for (std::size_t i = 0; i < c.x.size(); ++i) ind[i] = c.x[i] <= chi_s ? 1.0 : 0.0;
  std::vector<double> diff(c.x.size());
  for (std::size_t i = 0; i < c.x.size(); ++i) diff[i] = run.u_at_T[i] - ind[i];
  const double err = wave1d::interior_inner(diff, diff, c);
  const double ref = wave1d::interior_inner(ind, ind, c);
  return std::sqrt(err / ref);
}

}  // namespace ornet::bc
