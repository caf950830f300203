// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "ornet/wave1d.hpp"

namespace ornet::wave1d {

namespace {

double poly_eval(const std::vector<double>& c, double u) {
  double acc = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) acc = acc * u + c[k];
  return acc;
}

// integral of the local polynomial over [0, u]
double poly_integral(const std::vector<double>& c, double u) {
  double acc = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) acc = acc * u + c[k] / double(k + 1);
  return acc * u;
}

// re-expand around a new local origin shifted by s: p(u) -> p(u + s)
std::vector<double> poly_shift(const std::vector<double>& c, double s) {
  std::vector<double> out(c.size(), 0.0);
  for (std::size_t k = 0; k < c.size(); ++k) {
    // distribute c_k (u+s)^k
    double binom = 1.0;
    double spow = 1.0;
    for (std::size_t j = k + 1; j-- > 0;) {
      out[j] += c[k] * binom * spow;
      if (j > 0) {
        binom = binom * double(j) / double(k - j + 1);
        spow *= s;
      }
    }
  }
  return out;
}

}  // namespace

PiecewisePoly::PiecewisePoly(std::vector<double> breaks, std::vector<std::vector<double>> coeffs)
    : breaks_(std::move(breaks)), coeffs_(std::move(coeffs)) {
  require(breaks_.size() >= 2 && coeffs_.size() + 1 == breaks_.size(),
          "inconsistent piecewise polynomial");
}

PiecewisePoly PiecewisePoly::indicator(double a, double b, double value, double lo, double hi) {
  require(lo <= a && a < b && b <= hi, "indicator outside the domain");
  std::vector<double> brk;
  std::vector<std::vector<double>> cf;
  if (a > lo) { brk.push_back(lo); cf.push_back({0.0}); }
  brk.push_back(a);
  cf.push_back({value});
  brk.push_back(b);
  if (b < hi) { cf.push_back({0.0}); brk.push_back(hi); }
  return PiecewisePoly(std::move(brk), std::move(cf));
}

double PiecewisePoly::eval(double t) const {
  if (t <= breaks_.front()) t = breaks_.front();
  if (t >= breaks_.back()) {
    const std::size_t i = coeffs_.size() - 1;
    return poly_eval(coeffs_[i], breaks_.back() - breaks_[i]);
  }
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  const std::size_t i = std::size_t(it - breaks_.begin()) - 1;
  return poly_eval(coeffs_[std::min(i, coeffs_.size() - 1)], t - breaks_[i]);
}

PiecewisePoly PiecewisePoly::antiderivative() const {
  std::vector<std::vector<double>> cf(coeffs_.size());
  double running = 0.0;
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    std::vector<double> c(coeffs_[i].size() + 1);
    c[0] = running;
    for (std::size_t k = 0; k < coeffs_[i].size(); ++k) c[k + 1] = coeffs_[i][k] / double(k + 1);
    running += poly_integral(coeffs_[i], breaks_[i + 1] - breaks_[i]);
    cf[i] = std::move(c);
  }
  return PiecewisePoly(breaks_, std::move(cf));
}

PiecewisePoly PiecewisePoly::reflected() const {
  const double lo = breaks_.front(), hi = breaks_.back();
  std::vector<double> brk(breaks_.size());
  for (std::size_t i = 0; i < breaks_.size(); ++i) brk[i] = lo + hi - breaks_[breaks_.size() - 1 - i];
  std::vector<std::vector<double>> cf(coeffs_.size());
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    // segment j of the original maps to segment (m-1-j); local variable
    // u' = width_j - u, i.e. substitute and re-expand
    const std::size_t j = coeffs_.size() - 1 - i;
    const double w = breaks_[j + 1] - breaks_[j];
    std::vector<double> c = coeffs_[j];
    // p(w - u): flip sign of odd powers after shifting by w
    std::vector<double> flipped(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) flipped[k] = (k % 2 == 0) ? c[k] : -c[k];
    cf[i] = poly_shift(flipped, -w);  // p(-(u - w)) = p(w - u)
  }
  return PiecewisePoly(std::move(brk), std::move(cf));
}

PiecewisePoly PiecewisePoly::windowed(double a, double b) const {
  std::vector<double> brk;
  std::vector<std::vector<double>> cf;
  const double lo = breaks_.front(), hi = breaks_.back();
  a = std::max(a, lo);
  b = std::min(b, hi);
  brk.push_back(lo);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    double s0 = breaks_[i], s1 = breaks_[i + 1];
    // up to three pieces: before a, inside [a,b], after b
    auto push = [&](double from, double to, bool keep) {
      if (to <= from) return;
      if (brk.back() < from - 0.0) {}
      cf.push_back(keep ? poly_shift(coeffs_[i], from - s0) : std::vector<double>{0.0});
      brk.push_back(to);
    };
    const double c0 = std::max(s0, a), c1 = std::min(s1, b);
    if (c1 <= c0) {
      push(s0, s1, false);
    } else {
      push(s0, c0, false);
      push(c0, c1, true);
      push(c1, s1, false);
    }
  }
  return PiecewisePoly(std::move(brk), std::move(cf));
}

PiecewisePoly PiecewisePoly::scaled(double s) const {
  std::vector<std::vector<double>> cf = coeffs_;
  for (auto& c : cf)
    for (double& v : c) v *= s;
  return PiecewisePoly(breaks_, std::move(cf));
}

PiecewisePoly PiecewisePoly::operator+(const PiecewisePoly& other) const {
  require(std::abs(domain_lo() - other.domain_lo()) < 1e-14 &&
              std::abs(domain_hi() - other.domain_hi()) < 1e-14,
          "domain mismatch in piecewise sum");
  std::vector<double> brk;
  std::merge(breaks_.begin(), breaks_.end(), other.breaks_.begin(), other.breaks_.end(),
             std::back_inserter(brk));
  brk.erase(std::unique(brk.begin(), brk.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-14; }),
            brk.end());
  std::vector<std::vector<double>> cf(brk.size() - 1);
  for (std::size_t i = 0; i + 1 < brk.size(); ++i) {
    const double t0 = brk[i];
    auto seg = [&](const PiecewisePoly& p) {
      auto it = std::upper_bound(p.breaks_.begin(), p.breaks_.end(), t0 + 1e-15);
      std::size_t j = std::size_t(it - p.breaks_.begin()) - 1;
      j = std::min(j, p.coeffs_.size() - 1);
      return poly_shift(p.coeffs_[j], t0 - p.breaks_[j]);
    };
    std::vector<double> a = seg(*this), b = seg(other);
    if (b.size() > a.size()) a.resize(b.size(), 0.0);
    for (std::size_t k = 0; k < b.size(); ++k) a[k] += b[k];
    cf[i] = std::move(a);
  }
  return PiecewisePoly(std::move(brk), std::move(cf));
}

PiecewisePoly PiecewisePoly::operator-(const PiecewisePoly& other) const {
  return *this + other.scaled(-1.0);
}

double PiecewisePoly::integral(double a, double b) const {
  a = std::max(a, domain_lo());
  b = std::min(b, domain_hi());
  if (b <= a) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    const double s0 = breaks_[i], s1 = breaks_[i + 1];
    const double c0 = std::max(s0, a), c1 = std::min(s1, b);
    if (c1 <= c0) continue;
    acc += poly_integral(coeffs_[i], c1 - s0) - poly_integral(coeffs_[i], c0 - s0);
  }
  return acc;
}

}  // namespace ornet::wave1d
