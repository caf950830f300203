// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "ornet/wave1d.hpp"

namespace ornet::wave1d {

Mat basis_on_grid(const TimeBasis& basis, int time_steps) {
  // cell indicators sampled with the midpoint convention: jump samples carry
  // the average of the two one-sided values, which keeps the discrete source
  // second-order consistent with the box profile
  const double dt = basis.t_max() / time_steps;
  Mat v = Mat::Zero(basis.size(), time_steps + 1);
  for (int j = 0; j < basis.size(); ++j) {
    const double lo = basis.edges()[j], hi = basis.edges()[j + 1];
    const double val = 1.0 / std::sqrt(basis.widths()[j]);
    for (int k = 0; k <= time_steps; ++k) {
      const double t = k * dt;
      const bool at_lo = std::abs(t - lo) < 1e-9 * basis.t_max();
      const bool at_hi = std::abs(t - hi) < 1e-9 * basis.t_max();
      if (at_lo || at_hi)
        v(j, k) = 0.5 * val;
      else if (t > lo && t < hi)
        v(j, k) = val;
    }
  }
  return v;
}

namespace {

// cell edges as indices on the simulation grid; requires exact alignment
std::vector<int> edge_indices(const TimeBasis& basis, const SimConfig& cfg) {
  const double dt = basis.t_max() / cfg.time_steps;
  std::vector<int> idx(basis.size() + 1);
  for (int i = 0; i <= basis.size(); ++i) {
    const double q = basis.edges()[i] / dt;
    idx[i] = int(std::llround(q));
    if (std::abs(q - idx[i]) > 1e-9)
      throw DomainError("basis cell edges must lie on the simulation time grid");
  }
  return idx;
}

}  // namespace

NdResult nd_and_lambda(const WaveSpeedProfile& c, const TimeBasis& basis, const SimConfig& cfg) {
  const int n = basis.size();
  const double dt = basis.t_max() / cfg.time_steps;
  require(std::abs(basis.t_max() - 2.0 * cfg.horizon_T) < 1e-12,
          "basis horizon must match the simulation window");
  const std::vector<int> eidx = edge_indices(basis, cfg);
  const Mat v = basis_on_grid(basis, cfg.time_steps);

  NdResult out;
  out.nd_map = Mat::Zero(n, n);
  out.lambda = Mat::Zero(n, n);

  for (int j = 0; j < n; ++j) {
    std::vector<double> h(cfg.time_steps + 1);
    for (int k = 0; k <= cfg.time_steps; ++k) h[k] = v(j, k);
    const BoundaryRun run = solve_wave_boundary(c, h, cfg);

    for (int i = 0; i < n; ++i) {
      // cell quadrature of the trace: Simpson when the cell has an even
      // number of steps, trapezoid otherwise
      const int a = eidx[i], b = eidx[i + 1];
      double acc = 0.0;
      if ((b - a) % 2 == 0 && b - a >= 2) {
        for (int k = a; k + 2 <= b; k += 2)
          acc += dt / 3.0 * (run.trace[k] + 4.0 * run.trace[k + 1] + run.trace[k + 2]);
      } else {
        for (int k = a; k < b; ++k) acc += 0.5 * dt * (run.trace[k] + run.trace[k + 1]);
      }
      out.nd_map(i, j) = acc / std::sqrt(basis.widths()[i]);
      // weak time derivative against the cell indicator:
      // <d_t u, psi_i> = (u(edge_{i+1}) - u(edge_i)) / sqrt(w_i)
      out.lambda(i, j) =
          (run.trace[eidx[i + 1]] - run.trace[eidx[i]]) / std::sqrt(basis.widths()[i]);
    }
  }
  return out;
}

Mat nd_map(const WaveSpeedProfile& c, const TimeBasis& basis, const SimConfig& cfg) {
  return nd_and_lambda(c, basis, cfg).nd_map;
}

Mat lambda_op(const WaveSpeedProfile& c, const TimeBasis& basis, const SimConfig& cfg) {
  return nd_and_lambda(c, basis, cfg).lambda;
}

}  // namespace ornet::wave1d
