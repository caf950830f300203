// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "ornet/wave1d.hpp"

namespace ornet::wave1d {

double WaveSpeedProfile::max_speed() const {
  return *std::max_element(c.begin(), c.end());
}

double WaveSpeedProfile::c3_proxy() const {
  const double h = dx();
  double worst = 0.0;
  for (std::size_t i = 2; i + 2 < c.size(); ++i) {
    const double d3 = (c[i + 2] - 2 * c[i + 1] + 2 * c[i - 1] - c[i - 2]) / (2 * h * h * h);
    worst = std::max(worst, std::abs(d3));
  }
  return worst;
}

WaveSpeedProfile constant_profile(double x_max, int nodes, double value) {
  require(x_max > 0.0 && nodes >= 2 && value > 0.0, "bad profile parameters");
  WaveSpeedProfile p;
  p.x.resize(nodes);
  p.c.assign(nodes, value);
  for (int i = 0; i < nodes; ++i) p.x[i] = x_max * double(i) / (nodes - 1);
  p.c_min = p.c_max = value;
  return p;
}

namespace {

// C-infinity bump supported on |z| < 1, normalized to peak 1
double mollifier(double z) {
  const double z2 = z * z;
  if (z2 >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - z2));
}

}  // namespace

WaveSpeedProfile bump_profile(double x_max, int nodes, double center, double half_width,
                              double amplitude) {
  WaveSpeedProfile p = constant_profile(x_max, nodes, 1.0);
  for (int i = 0; i < nodes; ++i)
    p.c[i] = 1.0 + amplitude * mollifier((p.x[i] - center) / half_width);
  p.c_min = *std::min_element(p.c.begin(), p.c.end());
  p.c_max = *std::max_element(p.c.begin(), p.c.end());
  p.support_lo = center - half_width;
  p.support_hi = center + half_width;
  return p;
}

WaveSpeedProfile sample_prior(std::uint64_t seed, const PriorSpec& prior, double x_max,
                              int nodes) {
  require(prior.c_min <= 1.0 && 1.0 <= prior.c_max, "prior must contain c = 1");
  require(prior.support_hi > prior.support_lo && prior.support_lo > 0.0,
          "prior support must be a positive interval");
  require(prior.support_hi < x_max, "prior support exceeds the domain");
  WaveSpeedProfile p = constant_profile(x_max, nodes, 1.0);
  p.seed = seed;
  p.support_lo = prior.support_lo;
  p.support_hi = prior.support_hi;

  Rng rng(seed);
  const double mid = 0.5 * (prior.support_lo + prior.support_hi);
  const double rad = 0.5 * (prior.support_hi - prior.support_lo);
  // smooth cutoff confining the perturbation to I0 exactly
  for (int b = 0; b < prior.bumps; ++b) {
    const double center = rng.uniform(prior.support_lo + 0.15 * rad, prior.support_hi - 0.15 * rad);
    const double width = rng.uniform(0.3, 0.8) * rad;
    const double amp = rng.uniform(-1.0, 1.0) * prior.amplitude / prior.bumps;
    for (int i = 0; i < nodes; ++i) {
      const double cutoff = mollifier((p.x[i] - mid) / rad);
      const double g = std::exp(-0.5 * std::pow((p.x[i] - center) / width, 2));
      p.c[i] += amp * g * cutoff;
    }
  }
  for (double& v : p.c) v = std::clamp(v, prior.c_min, prior.c_max);
  // enforce the declared C^3 proxy bound by shrinking the perturbation
  const double proxy = p.c3_proxy();
  if (proxy > prior.smoothness) {
    const double scale = prior.smoothness / proxy;
    for (double& v : p.c) v = 1.0 + scale * (v - 1.0);
  }
  p.c_min = *std::min_element(p.c.begin(), p.c.end());
  p.c_max = *std::max_element(p.c.begin(), p.c.end());
  return p;
}

namespace {

// int dx / (linear c) over one cell, exact for the nodal interpolant
double cell_time(double c0, double c1, double dx) {
  if (std::abs(c1 - c0) < 1e-12 * (c0 + c1)) return dx * 2.0 / (c0 + c1);
  return dx * std::log(c1 / c0) / (c1 - c0);
}

// int dx / (linear c)^2 over one cell
double cell_mass(double c0, double c1, double dx) {
  if (std::abs(c1 - c0) < 1e-12 * (c0 + c1)) {
    const double cm = 0.5 * (c0 + c1);
    return dx / (cm * cm);
  }
  return dx / (c0 * c1);
}

}  // namespace

TravelTime travel_time(const WaveSpeedProfile& c) {
  for (double v : c.c) require(v > 0.0, "wave speed must be positive");
  TravelTime t;
  t.x = c.x;
  t.tau.resize(c.x.size());
  t.tau[0] = 0.0;
  for (std::size_t i = 1; i < c.x.size(); ++i)
    t.tau[i] = t.tau[i - 1] + cell_time(c.c[i - 1], c.c[i], c.x[i] - c.x[i - 1]);
  return t;
}

double TravelTime::at(double xq) const {
  if (xq <= x.front()) return tau.front();
  if (xq >= x.back()) return tau.back();
  const auto it = std::upper_bound(x.begin(), x.end(), xq);
  const std::size_t i = std::size_t(it - x.begin());
  const double w =(xq - x[i - 1]) / (x[i] - x[i - 1]);
  return tau[i - 1] + w * (tau[i] - tau[i - 1]);
}

double TravelTime::chi(double s) const {
  if (s <= tau.front()) return x.front();
  if (s >= tau.back()) return x.back();
  const auto it = std::upper_bound(tau.begin(), tau.end(), s);
  const std::size_t i = std::size_t(it - tau.begin());
  const double w = (s - tau[i - 1]) / (tau[i] - tau[i - 1]);
  return x[i - 1] + w * (x[i] - x[i - 1]);
}

double true_volume(const WaveSpeedProfile& c, double s) {
  require(s >= 0.0, "volume needs s >= 0");
  const TravelTime tt = travel_time(c);
  const double xs = tt.chi(s);
  double acc = 0.0;
  for (std::size_t i = 1; i < c.x.size() && c.x[i - 1] < xs; ++i) {
    const double hi = std::min(c.x[i], xs);
    const double frac = (hi - c.x[i - 1]) / (c.x[i] - c.x[i - 1]);
    const double c_hi = c.c[i - 1] + frac * (c.c[i] - c.c[i - 1]);
    acc += cell_mass(c.c[i - 1], c_hi, hi - c.x[i - 1]);
  }
  return acc;
}

namespace {

struct Stepper {
  int nx = 0;
  double dx = 0.0, dt = 0.0;
  std::vector<double> r2;  // (c dt/dx)^2 per node
  std::vector<double> u_prev, u_cur, u_next;

  void init(const WaveSpeedProfile& c, const SimConfig& cfg) {
    nx = int(c.x.size());
    dx = c.dx();
    dt = 2.0 * cfg.horizon_T / cfg.time_steps;
    const double cfl = c.max_speed() * dt / dx;
    if (cfl > cfg.cfl + 1e-12)
      throw StabilityError("CFL " + std::to_string(cfl) + " exceeds the cap");
    if (c.x.back() < 2.0 * cfg.horizon_T * c.max_speed() + cfg.margin - 1e-9)
      throw DomainError("domain too short: reflections from the far end return before 2T");
    r2.resize(nx);
    for (int i = 0; i < nx; ++i) r2[i] = std::pow(c.c[i] * dt / dx, 2);
    u_prev.assign(nx, 0.0);
    u_cur.assign(nx, 0.0);
    u_next.assign(nx, 0.0);
  }

  // advance from step k-1 to k (k >= 1); h_prev = h(t_{k-1})
  void step(int k, double h_prev) {
    if (k == 1) {
      // first step of the zero-state leapfrog: u^1 = (r^2/2) lap(u^0) with
      // the Neumann ghost carrying the source
      const double lap0 = -2.0 * dx * h_prev;  // ghost - 2 u0 + u1 with u = 0
      for (int i = 0; i < nx; ++i) u_next[i] = 0.0;
      u_next[0] = 0.5 * r2[0] * lap0;
    } else {
      for (int i = 1; i + 1 < nx; ++i) {
        const double lap = u_cur[i + 1] - 2.0 * u_cur[i] + u_cur[i - 1];
        u_next[i] = 2.0 * u_cur[i] - u_prev[i] + r2[i] * lap;
      }
      const double ghost = u_cur[1] - 2.0 * dx * h_prev;
      const double lap0 = ghost - 2.0 * u_cur[0] + u_cur[1];
      u_next[0] = 2.0 * u_cur[0] - u_prev[0] + r2[0] * lap0;
      u_next[nx - 1] = 0.0;
    }
    std::swap(u_prev, u_cur);
    std::swap(u_cur, u_next);
  }
};

}  // namespace

WaveField solve_wave(const WaveSpeedProfile& c, const std::vector<double>& h_samples,
                     const SimConfig& cfg) {
  require(int(h_samples.size()) == cfg.time_steps + 1, "need N_t + 1 source samples");
  Stepper st;
  st.init(c, cfg);
  WaveField f;
  f.x = c.x;
  f.t.resize(cfg.time_steps + 1);
  f.u = Mat::Zero(cfg.time_steps + 1, st.nx);
  f.cfl_used = c.max_speed() * st.dt / st.dx;
  for (int k = 0; k <= cfg.time_steps; ++k) f.t[k] = st.dt * k;
  for (int k = 1; k <= cfg.time_steps; ++k) {
    st.step(k, h_samples[k - 1]);
    for (int i = 0; i < st.nx; ++i) f.u(k, i) = st.u_cur[i];
  }
  return f;
}

double WaveField::energy(int k, const WaveSpeedProfile& c) const {
  require(k >= 1 && k < u.rows(), "energy index out of range");
  const double dt = t[1] - t[0];
  const double dx = x[1] - x[0];
  double acc = 0.0;
  for (Eigen::Index i = 0; i < u.cols(); ++i) {
    const double vt = (u(k, i) - u(k - 1, i)) / dt;
    acc += 0.5 * vt * vt / (c.c[i] * c.c[i]) * dx;
  }
  for (Eigen::Index i = 0; i + 1 < u.cols(); ++i) {
    // staggered-in-time strain term keeps the discrete energy conserved
    const double sx0 = (u(k, i + 1) - u(k, i)) / dx;
    const double sx1 = (u(k - 1, i + 1) - u(k - 1, i)) / dx;
    acc += 0.5 * sx0 * sx1 * dx;
  }
  return acc;
}

BoundaryRun solve_wave_boundary(const WaveSpeedProfile& c, const std::vector<double>& h_samples,
                                const SimConfig& cfg) {
  require(int(h_samples.size()) == cfg.time_steps + 1, "need N_t + 1 source samples");
  Stepper st;
  st.init(c, cfg);
  BoundaryRun out;
  out.x = c.x;
  out.trace.assign(cfg.time_steps + 1, 0.0);
  const int half = cfg.time_steps / 2;
  for (int k = 1; k <= cfg.time_steps; ++k) {
    st.step(k, h_samples[k - 1]);
    out.trace[k] = st.u_cur[0];
    if (k == half) out.u_at_T = st.u_cur;
  }
  return out;
}

SimGrid make_grid(const SimConfig& cfg, double c_cap) {
  require(c_cap > 0.0, "speed cap must be positive");
  const double dt = 2.0 * cfg.horizon_T / cfg.time_steps;
  const double dx = c_cap * dt / cfg.cfl;
  const double x_max = 2.0 * cfg.horizon_T * c_cap + cfg.margin;
  SimGrid g;
  g.nodes = int(std::ceil(x_max / dx)) + 1;
  g.x_max = dx * (g.nodes - 1);
  return g;
}

WaveSpeedProfile resample_profile(const WaveSpeedProfile& c, double x_max, int nodes) {
  WaveSpeedProfile out = constant_profile(x_max, nodes, 1.0);
  out.seed = c.seed;
  out.support_lo = c.support_lo;
  out.support_hi = c.support_hi;
  for (int i = 0; i < nodes; ++i) {
    const double xq = out.x[i];
    if (xq <= c.x.front()) { out.c[i] = c.c.front(); continue; }
    if (xq >= c.x.back()) { out.c[i] = c.c.back(); continue; }
    const auto it = std::upper_bound(c.x.begin(), c.x.end(), xq);
    const std::size_t j = std::size_t(it - c.x.begin());
    const double w = (xq - c.x[j - 1]) / (c.x[j] - c.x[j - 1]);
    out.c[i] = c.c[j - 1] + w * (c.c[j] - c.c[j - 1]);
  }
  out.c_min = *std::min_element(out.c.begin(), out.c.end());
  out.c_max = *std::max_element(out.c.begin(), out.c.end());
  return out;
}

double interior_inner(const std::vector<double>& u, const std::vector<double>& v,
                      const WaveSpeedProfile& c) {
  require(u.size() == v.size() && u.size() == c.c.size(), "interior product size mismatch");
  const double dx = c.dx();
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double w = (i == 0 || i + 1 == u.size()) ? 0.5 : 1.0;
    acc += w * u[i] * v[i] / (c.c[i] * c.c[i]) * dx;
  }
  return acc;
}

}  // namespace ornet::wave1d
