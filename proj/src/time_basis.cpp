// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "ornet/wave1d.hpp"

namespace ornet::wave1d {

TimeBasis TimeBasis::uniform(double horizon_T, int n) {
  require(horizon_T > 0.0 && n >= 2, "bad basis parameters");
  TimeBasis b;
  b.kind_ = "pwc";
  b.T_ = horizon_T;
  b.edges_.resize(n + 1);
  for (int i = 0; i <= n; ++i) b.edges_[i] = 2.0 * horizon_T * double(i) / n;
  b.widths_.assign(n, 2.0 * horizon_T / n);
  return b;
}

TimeBasis TimeBasis::graded(double horizon_T, int segments, int ratio) {
  require(horizon_T > 0.0 && segments >= 1 && ratio >= 2, "bad graded basis parameters");
  TimeBasis b;
  b.kind_ = "pwc-graded";
  b.T_ = horizon_T;
  const double block = horizon_T / segments;
  const double fine = block / ratio;
  std::vector<double> left;
  for (int j = 0; j < segments; ++j) {
    left.push_back(j * block);
    left.push_back(j * block + fine);
  }
  left.push_back(horizon_T);
  b.edges_ = left;
  for (std::size_t i = left.size() - 1; i-- > 0;)
    b.edges_.push_back(2.0 * horizon_T - left[i]);
  b.widths_.resize(b.edges_.size() - 1);
  for (std::size_t i = 0; i + 1 < b.edges_.size(); ++i)
    b.widths_[i] = b.edges_[i + 1] - b.edges_[i];
  return b;
}

double TimeBasis::synth_at(const Vec& coeffs, double t) const {
  require(coeffs.size() == size(), "coefficient length != basis size");
  if (t < edges_.front() || t > edges_.back()) return 0.0;
  auto it = std::upper_bound(edges_.begin(), edges_.end(), t);
  std::size_t i = std::size_t(it - edges_.begin());
  i = (i == 0) ? 0 : i - 1;
  if (i >= widths_.size()) i = widths_.size() - 1;
  return coeffs[i] / std::sqrt(widths_[i]);
}

Vec TimeBasis::synth_samples(const Vec& coeffs, const std::vector<double>& ts) const {
  Vec out(ts.size());
  for (std::size_t k = 0; k < ts.size(); ++k) out[k] = synth_at(coeffs, ts[k]);
  return out;
}

Vec TimeBasis::analyze(const PiecewisePoly& f) const {
  Vec out(size());
  for (int i = 0; i < size(); ++i)
    out[i] = f.integral(edges_[i], edges_[i + 1]) / std::sqrt(widths_[i]);
  return out;
}

PiecewisePoly TimeBasis::basis_function(int j) const {
  require(j >= 0 && j < size(), "basis index out of range");
  return PiecewisePoly::indicator(edges_[j], edges_[j + 1], 1.0 / std::sqrt(widths_[j]), 0.0,
                                  t_max());
}

double TimeBasis::orthonormality_defect() const {
  // Gram matrix by exact integration of the cell indicators
  Mat gram(size(), size());
  for (int j = 0; j < size(); ++j) gram.col(j) = analyze(basis_function(j));
  return (gram - Mat::Identity(size(), size())).cwiseAbs().maxCoeff();
}

}  // namespace ornet::wave1d
