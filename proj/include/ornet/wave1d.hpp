// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ornet/common.hpp"
#include "ornet/rng.hpp"

namespace ornet::wave1d {

// ---- exact calculus on piecewise polynomials over [0, 2T] ----
// Used to assemble the time-domain operators (integration, reversal,
// windowing) without composition losses.
class PiecewisePoly {
 public:
  PiecewisePoly() = default;
  // breakpoints strictly increasing, coeffs[i] = polynomial on
  // [breaks[i], breaks[i+1]) in powers of (t - breaks[i])
  PiecewisePoly(std::vector<double> breaks, std::vector<std::vector<double>> coeffs);

  static PiecewisePoly indicator(double a, double b, double value, double lo, double hi);

  double domain_lo() const { return breaks_.front(); }
  double domain_hi() const { return breaks_.back(); }
  double eval(double t) const;
  // F(t) = int_lo^t f
  PiecewisePoly antiderivative() const;
  // t -> f(lo + hi - t)
  PiecewisePoly reflected() const;
  // multiply by 1_{[a,b]}
  PiecewisePoly windowed(double a, double b) const;
  PiecewisePoly scaled(double s) const;
  PiecewisePoly operator+(const PiecewisePoly& other) const;
  PiecewisePoly operator-(const PiecewisePoly& other) const;
  double integral(double a, double b) const;

  const std::vector<double>& breaks() const { return breaks_; }

 private:
  std::vector<double> breaks_;
  std::vector<std::vector<double>> coeffs_;
};

// ---- orthonormal piecewise-constant time basis on [0, 2T] ----
//
// kind "pwc": n uniform cells.
// kind "pwc-graded": each of `segments` blocks on [0,T] is split into a fine
// leading cell (width block/ratio) and a coarse remainder, mirrored on
// [T, 2T]; n = 4 * segments. The fine cells sit at the control-window edges
// used by the boundary-control sweep.
class TimeBasis {
 public:
  static TimeBasis uniform(double horizon_T, int n);
  static TimeBasis graded(double horizon_T, int segments, int ratio);

  double horizon() const { return T_; }       // T; functions live on [0, 2T]
  double t_max() const { return 2.0 * T_; }
  int size() const { return int(widths_.size()); }
  const std::string& kind() const { return kind_; }
  const std::vector<double>& edges() const { return edges_; }  // size n+1
  const std::vector<double>& widths() const { return widths_; }

  // synthesis (B f)(t) for a coefficient vector
  double synth_at(const Vec& coeffs, double t) const;
  Vec synth_samples(const Vec& coeffs, const std::vector<double>& ts) const;
  // analysis coefficients of a piecewise polynomial
  Vec analyze(const PiecewisePoly& f) const;
  // basis function as a piecewise polynomial
  PiecewisePoly basis_function(int j) const;

  // orthonormality defect ||B*B - I|| computed by exact integration
  double orthonormality_defect() const;

 private:
  std::string kind_;
  double T_ = 1.0;
  std::vector<double> edges_;
  std::vector<double> widths_;
};

// ---- wave speed profiles ----

struct PriorSpec {
  double c_min = 0.7;        // C0
  double c_max = 1.3;        // C1
  double smoothness = 60.0;  // bound on the finite-difference C^3 proxy
  double support_lo = 0.0;   // I0 (relative to X_max when <= 1? absolute units)
  double support_hi = 0.0;
  double amplitude = 0.2;    // max |c - 1|
  int bumps = 3;
};

struct WaveSpeedProfile {
  std::vector<double> x;  // uniform grid on [0, X_max]
  std::vector<double> c;  // positive per node, c(0) = 1
  double c_min = 1.0, c_max = 1.0;
  double support_lo = 0.0, support_hi = 0.0;  // I0
  std::uint64_t seed = 0;

  double dx() const { return x.size() > 1 ? x[1] - x[0] : 0.0; }
  double max_speed() const;
  // finite-difference max |c'''| proxy
  double c3_proxy() const;
};

WaveSpeedProfile constant_profile(double x_max, int nodes, double value = 1.0);
WaveSpeedProfile bump_profile(double x_max, int nodes, double center, double half_width,
                              double amplitude);
WaveSpeedProfile sample_prior(std::uint64_t seed, const PriorSpec& prior, double x_max, int nodes);

// travel time tau(x) = int_0^x dx'/c and its inverse chi
struct TravelTime {
  std::vector<double> x;
  std::vector<double> tau;
  double at(double xq) const;   // tau(x)
  double chi(double s) const;   // tau^{-1}(s)
};
TravelTime travel_time(const WaveSpeedProfile& c);

// V(s) = int_0^{chi(s)} c^{-2} dx
double true_volume(const WaveSpeedProfile& c, double s);

// ---- leapfrog solver ----

struct SimConfig {
  double horizon_T = 1.0;  // simulate on [0, 2T]
  int time_steps = 1024;   // N_t; samples at k * (2T/N_t)
  double cfl = 0.9;        // max(c) dt / dx, must be <= 0.9
  double margin = 0.5;     // X_max >= 2 T max(c) + margin
};

struct WaveField {
  std::vector<double> t;  // N_t + 1 samples
  std::vector<double> x;
  Mat u;                  // (time) x (space)
  double cfl_used = 0.0;

  // discrete leapfrog energy at step k (for the conservation diagnostic)
  double energy(int k, const WaveSpeedProfile& c) const;
};

// full field; h_samples has N_t + 1 entries (Neumann data d_x u(0,t) = h)
WaveField solve_wave(const WaveSpeedProfile& c, const std::vector<double>& h_samples,
                     const SimConfig& cfg);

struct BoundaryRun {
  std::vector<double> trace;       // u(0, t_k), N_t + 1 values
  std::vector<double> u_at_T;      // snapshot u(., T)
  std::vector<double> x;
};
BoundaryRun solve_wave_boundary(const WaveSpeedProfile& c, const std::vector<double>& h_samples,
                                const SimConfig& cfg);

// grid aligned with a profile resolution for a given config
WaveSpeedProfile resample_profile(const WaveSpeedProfile& c, double x_max, int nodes);

// spatial grid sized for the config: dx = c_cap dt / cfl, X_max = 2T c_cap + margin
struct SimGrid {
  double x_max = 0.0;
  int nodes = 0;
};
SimGrid make_grid(const SimConfig& cfg, double c_cap);

// ---- data operators ----

struct NdResult {
  Mat nd_map;   // M_ND in basis coordinates
  Mat lambda;   // d_t M_ND assembled by the weak (integration-by-parts) pairing
};
NdResult nd_and_lambda(const WaveSpeedProfile& c, const TimeBasis& basis, const SimConfig& cfg);

Mat nd_map(const WaveSpeedProfile& c, const TimeBasis& basis, const SimConfig& cfg);
Mat lambda_op(const WaveSpeedProfile& c, const TimeBasis& basis, const SimConfig& cfg);

// basis samples of every basis function on the simulation time grid
Mat basis_on_grid(const TimeBasis& basis, int time_steps);

// interior L2(M) inner product with weight c^{-2} by trapezoid
double interior_inner(const std::vector<double>& u, const std::vector<double>& v,
                      const WaveSpeedProfile& c);

}  // namespace ornet::wave1d
