// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <climits>
#include <cmath>
#include <limits>

#include "ornet/training.hpp"

#include "ornet/rng.hpp"

namespace ornet::training {

void TrainingSet::validate(int width, double norm_slack) const {
  if (inputs.size() != targets.size()) throw DimensionError("inputs/targets size mismatch");
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].rows() != width || inputs[i].cols() != width)
      throw DimensionError("sample " + std::to_string(i) + " has wrong operator size");
    if (targets[i].size() != width)
      throw DimensionError("sample " + std::to_string(i) + " has wrong target length");
    if (operator_norm(inputs[i]) > 1.0 + norm_slack)
      throw DomainError("sample " + std::to_string(i) + " violates the unit-ball assumption");
  }
}

double tree_sum(const std::vector<double>& terms) {
  if (terms.empty()) return 0.0;
  std::vector<double> level = terms;
  while (level.size() > 1) {
    std::vector<double> next((level.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) next[i / 2] = level[i] + level[i + 1];
    if (level.size() % 2) next.back() = level.back();
    level = std::move(next);
  }
  return level[0];
}

namespace {

Vec default_h0(const TrainConfig& cfg, int n) {
  if (cfg.h0.size() == n) return cfg.h0;
  Vec h = Vec::Zero(n);
  h[0] = 1.0;
  return h;
}

Vec net_output(const ornn::ParamSet& params, const Mat& lambda, const Vec& h0) {
  if (params.spec().truncation_bound)
    return ornn::truncate_forward(params, lambda, h0, *params.spec().truncation_bound);
  return ornn::forward_general(params, lambda, h0).output;
}

}  // namespace

double loss(const ornn::ParamSet& params, const Mat& lambda, const Vec& target, double alpha,
            const Vec& h0) {
  if (target.size() != params.width()) throw DimensionError("target length != width");
  const Vec out = net_output(params, lambda, h0);
  return (out - target).squaredNorm() + alpha * ornn::regularizer(params);
}

double empirical_data_fit(const ornn::ParamSet& params, const TrainingSet& s, const Vec& h0) {
  if (s.size() == 0) throw EmptySetError("empirical loss over an empty set");
  std::vector<double> terms(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    terms[i] = (net_output(params, s.inputs[i], h0) - s.targets[i]).squaredNorm();
  return tree_sum(terms) / double(s.size());
}

double empirical_loss(const ornn::ParamSet& params, const TrainingSet& s, double alpha,
                      const Vec& h0) {
  return empirical_data_fit(params, s, h0) + alpha * ornn::regularizer(params);
}

TrainResult train(const ornn::ParamSet& init, const TrainingSet& s, const TrainConfig& cfg) {
  require(cfg.alpha > 0.0 && cfg.alpha <= 1.0, "alpha outside (0,1]");
  require(cfg.step_size > 0.0, "step size must be positive");
  if (s.size() == 0) throw EmptySetError("training on an empty set");
  s.validate(init.width());

  const int n = init.width();
  const Vec h0 = default_h0(cfg, n);
  const double r0_cap = cfg.r0_cap > 0.0 ? cfg.r0_cap : cfg.l0 / cfg.alpha;

  ornn::ParamSet params = init;
  TrainResult result;
  result.history.reserve(cfg.max_iters + 1);

  double step = cfg.step_size;
  double best_obj = std::numeric_limits<double>::infinity();
  ornn::ParamSet best = params;

  auto record = [&](int iter, double fit, double reg) {
    TrainHistoryRow row;
    row.iter = iter;
    row.data_fit = fit;
    row.regularizer = reg;
    row.n1 = ornn::sparsity_count(params, 1e-12).p1;
    row.loss = fit + cfg.alpha * reg;
    result.history.push_back(row);
    return row.loss;
  };

  double fit = empirical_data_fit(params, s, h0);
  double reg = ornn::regularizer(params);
  double prev_obj = record(0, fit, reg);
  if (prev_obj < best_obj) { best_obj = prev_obj; best = params; }

  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    // mean gradient of the data-fit term, fixed sample order
    ornn::ParamGrad acc = ornn::zero_grad_like(params);
    for (std::size_t i = 0; i < s.size(); ++i) {
      ornn::ForwardTrace tr = ornn::forward_general(params, s.inputs[i], h0);
      Vec out = tr.output;
      if (params.spec().truncation_bound)
        out = ornn::clamp_via_relu(out, *params.spec().truncation_bound);
      Vec seed = 2.0 * (out - s.targets[i]);
      ornn::ParamGrad g = ornn::backward(params, s.inputs[i], h0, tr, seed);
      acc.add_scaled(g, 1.0 / double(s.size()));
    }

    // gradient step
    for (std::size_t i = 0; i < params.storage_p1_size(); ++i)
      params.storage_p1(i) -= step * acc.p1[i];
    for (std::size_t i = 0; i < params.storage_p2_size(); ++i)
      params.storage_p2(i) -= step * acc.p2[i];

    if (cfg.prox_every > 0 && iter % cfg.prox_every == 0) {
      // block soft threshold (prox of (alpha/2)||.|| per P1 vector)
      const double thr = 0.5 * cfg.alpha * step * cfg.prox_every;
      for (std::size_t i = 0; i < params.storage_p1_size(); ++i) {
        Vec& v = params.storage_p1(i);
        const double nv = v.norm();
        v *= (nv > thr) ? (1.0 - thr / nv) : 0.0;
      }
    }

    // projection onto the Theta0 caps
    for (std::size_t i = 0; i < params.storage_p1_size(); ++i) {
      Vec& v = params.storage_p1(i);
      const double nv = v.norm();
      if (nv > 1.0) v /= nv;
    }
    for (std::size_t i = 0; i < params.storage_p2_size(); ++i) {
      Vec& v = params.storage_p2(i);
      const double nv = v.norm();
      if (nv > 1.0) v /= nv;
    }

    // R0 cap: uniform scaling of the P1 block
    reg = ornn::regularizer(params);
    if (reg > r0_cap) {
      const double sc = r0_cap / reg;
      for (std::size_t i = 0; i < params.storage_p1_size(); ++i) params.storage_p1(i) *= sc;
      reg = ornn::regularizer(params);
    }

    fit = empirical_data_fit(params, s, h0);
    if (!std::isfinite(fit))
      throw NumericalError("training diverged at iteration " + std::to_string(iter));
    const double obj = record(iter, fit, reg);

    if (obj < best_obj) {
      best_obj = obj;
      best = params;
    }
    if (obj > prev_obj + cfg.tolerance) step *= 0.5;  // backtracking on increase
    prev_obj = obj;
    if (step < 1e-14) break;
  }

  result.params = std::move(best);
  return result;
}

SparsityBudget sparsity_budget(int depth, double alpha, double r0_or_l0, BudgetFlavor flavor) {
  require(alpha > 0.0 && alpha <= 1.0, "alpha outside (0,1]");
  require(r0_or_l0 >= 0.0, "budget input must be nonnegative");
  const double r0 = flavor == BudgetFlavor::FromR0 ? r0_or_l0 : r0_or_l0 / alpha;
  SparsityBudget b;
  // N1 = floor(4^{L+1} R0^{3/2} alpha^{-1/2} exp(2 R0)), computed in logs
  if (r0 == 0.0) {
    b.n1 = 0;
    b.log10_n1 = -std::numeric_limits<double>::infinity();
  } else {
    const double ln = (depth + 1) * std::log(4.0) + 1.5 * std::log(r0) - 0.5 * std::log(alpha) +
                      2.0 * r0;
    b.log10_n1 = ln / std::log(10.0);
    if (ln > std::log(double(LONG_MAX) / 2)) {
      b.n1 = LONG_MAX;
      b.saturated = true;
    } else {
      b.n1 = long(std::floor(std::exp(ln)));
    }
  }
  b.n0 = b.saturated ? LONG_MAX : 2L * depth + b.n1;
  return b;
}

double BoundReport::log10_bound(double delta, double s) const {
  const double decay = 2.0 * s * delta * delta / (std::pow(5.0 * width, 2) * std::pow(f_inf, 4));
  return (ln_c1 + std::exp(ln_c2) * (-std::log(delta)) - decay) / std::log(10.0);
}

double BoundReport::min_samples(double delta, double target) const {
  // ln C1 - C2 ln delta - 2 s delta^2 / ((5n)^2 |f|^4) <= ln target
  const double kappa = 2.0 * delta * delta / (std::pow(5.0 * width, 2) * std::pow(f_inf, 4));
  const double need = ln_c1 + std::exp(ln_c2) * (-std::log(delta)) - std::log(target);
  return std::max(0.0, need / kappa);
}

BoundReport generalization_constants_case_i(int depth, int width, double alpha, double f_inf,
                                            double l0) {
  require(depth >= 1 && width >= 1, "bad architecture");
  require(alpha > 0.0 && alpha <= 1.0, "alpha outside (0,1]");
  require(f_inf > 0.0 && l0 > 0.0, "norms must be positive");
  BoundReport r;
  r.flavor = BoundFlavor::CaseI;
  r.depth = depth;
  r.width = width;
  r.alpha = alpha;
  r.f_inf = f_inf;
  r.l0 = l0;
  // C1 = exp(8^{L+4} n^{3/2} (1+|f|) exp(5 L0/alpha)); ln C1 kept in logs
  r.ln_c1 = std::exp((depth + 4) * std::log(8.0) + 1.5 * std::log(double(width)) +
                     std::log1p(f_inf) + 5.0 * l0 / alpha);
  // C2 = 8^{L+1} n exp(4 L0/alpha)
  r.ln_c2 = (depth + 1) * std::log(8.0) + std::log(double(width)) + 4.0 * l0 / alpha;
  r.log10_c1 = r.ln_c1 / std::log(10.0);
  r.log10_c2 = r.ln_c2 / std::log(10.0);
  r.c1 = r.ln_c1 < 700.0 ? std::exp(r.ln_c1) : std::numeric_limits<double>::infinity();
  r.c2 = r.ln_c2 < 700.0 ? std::exp(r.ln_c2) : std::numeric_limits<double>::infinity();
  return r;
}

BoundReport generalization_constants_case_ii(int depth, int width, double alpha, double f_inf,
                                             double r0, double eps0) {
  require(depth >= 1 && width >= 1, "bad architecture");
  require(alpha > 0.0 && alpha <= 1.0, "alpha outside (0,1]");
  require(f_inf > 0.0 && eps0 > 0.0, "norms must be positive");
  if (r0 < 1.0) throw DomainError("case (ii) requires R0 >= 1");
  if (alpha < eps0 * eps0 / r0) throw DomainError("case (ii) requires alpha >= eps0^2 / R0");
  BoundReport r;
  r.flavor = BoundFlavor::CaseII;
  r.depth = depth;
  r.width = width;
  r.alpha = alpha;
  r.f_inf = f_inf;
  r.r0 = r0;
  r.eps0 = eps0;
  // C1 <= 2 exp(8^{L+3} n^{3/2} (R0+L+|f|) exp(6 R0) alpha^{-1/2})
  r.ln_c1 = std::log(2.0) +
            std::exp((depth + 3) * std::log(8.0) + 1.5 * std::log(double(width)) +
                     std::log(r0 + depth + f_inf) + 6.0 * r0 - 0.5 * std::log(alpha));
  // C2 <= 8^{L+1} n exp(6 R0) alpha^{-1/2}
  r.ln_c2 = (depth + 1) * std::log(8.0) + std::log(double(width)) + 6.0 * r0 -
            0.5 * std::log(alpha);
  r.log10_c1 = r.ln_c1 / std::log(10.0);
  r.log10_c2 = r.ln_c2 / std::log(10.0);
  r.c1 = r.ln_c1 < 700.0 ? std::exp(r.ln_c1) : std::numeric_limits<double>::infinity();
  r.c2 = r.ln_c2 < 700.0 ? std::exp(r.ln_c2) : std::numeric_limits<double>::infinity();
  return r;
}

CoveringBound covering_size(double r0, long n0, int width, double m0, double rho, int depth) {
  if (!(rho > 0.0 && rho <= r0)) throw DomainError("need 0 < rho <= R0");
  require(m0 >= 1.0 && n0 >= 0 && width >= 1, "bad covering inputs");
  CoveringBound b;
  const double nn = double(n0) * double(width);
  b.log10_count = nn * std::log10(8.0) + std::log10(m0) + nn * std::log10(r0 / rho);
  b.perturbation_radius =
      std::pow(4.0, depth + 1) * rho * (r0 + 2.0 * depth) * std::exp(2.0 * r0);
  return b;
}

double generalization_gap_estimate(const ornn::ParamSet& params, const TrainingSet& s_train,
                                   const TrainingSet& s_test, double alpha, const Vec& h0) {
  if (s_train.size() == 0 || s_test.size() == 0)
    throw EmptySetError("gap estimate needs nonempty train and test sets");
  const Vec h = h0.size() == params.width() ? h0 : [&] {
    Vec e = Vec::Zero(params.width());
    e[0] = 1.0;
    return e;
  }();
  return std::abs(empirical_loss(params, s_train, alpha, h) -
                  empirical_loss(params, s_test, alpha, h));
}

CrossValidationResult cross_validate_alpha(const ornn::ParamSet& init, const TrainingSet& s,
                                           const std::vector<double>& candidates, int folds,
                                           const TrainConfig& cfg, double slack) {
  if (candidates.empty()) throw DomainError("no alpha candidates");
  require(folds >= 2, "need at least 2 folds");
  require(s.size() >= std::size_t(folds), "need at least one sample per fold");

  const int n = init.width();
  const Vec h0 = [&] {
    if (cfg.h0.size() == n) return cfg.h0;
    Vec e = Vec::Zero(n);
    e[0] = 1.0;
    return e;
  }();

  // deterministic fold partition: shuffle indices with the config seed, then
  // deal them round-robin
  std::vector<std::size_t> order(s.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(cfg.seed ^ 0xf01d5eedULL);
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng.below(i)]);

  CrossValidationResult res;
  res.cv_errors.resize(candidates.size());
  for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
    std::vector<double> fold_err(folds);
    for (int f = 0; f < folds; ++f) {
      TrainingSet tr, te;
      tr.seed = s.seed;
      te.seed = s.seed;
      for (std::size_t i = 0; i < order.size(); ++i) {
        auto& dst = (int(i % folds) == f) ? te : tr;
        dst.inputs.push_back(s.inputs[order[i]]);
        dst.targets.push_back(s.targets[order[i]]);
      }
      TrainConfig c = cfg;
      c.alpha = candidates[ci];
      TrainResult out = train(init, tr, c);
      fold_err[f] = empirical_data_fit(out.params, te, h0);
    }
    res.cv_errors[ci] = tree_sum(fold_err) / folds;
  }

  const double best = *std::min_element(res.cv_errors.begin(), res.cv_errors.end());
  // smallest candidate whose error is within (1+slack) of the best
  std::vector<std::size_t> by_value(candidates.size());
  for (std::size_t i = 0; i < by_value.size(); ++i) by_value[i] = i;
  std::sort(by_value.begin(), by_value.end(),
            [&](std::size_t a, std::size_t b) { return candidates[a] < candidates[b]; });
  for (std::size_t i : by_value)
    if (res.cv_errors[i] <= (1.0 + slack) * best) {
      res.alpha = candidates[i];
      return res;
    }
  res.alpha = candidates[by_value.front()];
  return res;
}

DiscretizationBudget discretization_budget(double delta, double C, double Cpp) {
  require(delta > 0.0 && delta < 1.0, "delta outside (0,1)");
  require(C > 0.0 && Cpp > 0.0, "constants must be positive");
  DiscretizationBudget b;
  const double ln_delta = std::log(delta);
  const double ln_eps = 270.0 * ln_delta;
  b.log10_eps = ln_eps / std::log(10.0);
  b.eps = ln_eps > -700.0 ? std::exp(ln_eps) : 0.0;
  const double ln_C = std::log(C);
  const double l10 = std::log(10.0);
  b.log10_n0 = (ln_C - (4.0 / 7.0) * ln_eps) / l10;
  b.log10_k = (ln_C - (1.0 / 18.0) * ln_eps) / l10;
  b.log10_width = (ln_C - (9.0 / 14.0) * ln_eps) / l10;
  b.log10_r0 = (std::log(Cpp) - 16.0 * ln_delta) / l10;
  auto expd = [](double log10v) {
    return log10v < 300.0 ? std::pow(10.0, log10v) : std::numeric_limits<double>::infinity();
  };
  b.n0 = expd(b.log10_n0);
  b.k_count = expd(b.log10_k);
  b.width = expd(b.log10_width);
  b.r0 = expd(b.log10_r0);
  b.depth = C * std::log(1.0 / delta);
  return b;
}

}  // namespace ornet::training
