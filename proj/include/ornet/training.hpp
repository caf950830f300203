// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ornet/ornn.hpp"

namespace ornet::training {

struct TrainingSet {
  std::vector<Mat> inputs;    // Lambda_i, all n x n with ||Lambda|| <= 1 (+ slack)
  std::vector<Vec> targets;   // f(Lambda_i)
  std::uint64_t seed = 0;
  std::string prior_tag;

  std::size_t size() const { return inputs.size(); }
  void validate(int width, double norm_slack = 0.15) const;
};

struct TrainConfig {
  double alpha = 1e-2;
  double r0_cap = -1.0;     // < 0: derived as L0 / alpha (R0 equation)
  double l0 = 1.0;          // L0 used when r0_cap is derived
  int max_iters = 1000;
  double step_size = 1e-2;  // halved on objective increase
  int prox_every = 1;
  double tolerance = 1e-10;
  std::uint64_t seed = 0;
  Vec h0;                   // excitation; defaults to e_1 when empty
};

struct TrainHistoryRow {
  int iter = 0;
  double data_fit = 0.0;
  double regularizer = 0.0;
  long n1 = 0;
  double loss = 0.0;
};

struct TrainResult {
  ornn::ParamSet params;
  std::vector<TrainHistoryRow> history;
};

// ||f_theta(Lambda) - target||^2 + alpha R(theta); truncated forward when the
// spec carries a truncation bound
double loss(const ornn::ParamSet& params, const Mat& lambda, const Vec& target, double alpha,
            const Vec& h0);

double empirical_loss(const ornn::ParamSet& params, const TrainingSet& s, double alpha,
                      const Vec& h0);

// mean squared data fit only (no penalty)
double empirical_data_fit(const ornn::ParamSet& params, const TrainingSet& s, const Vec& h0);

// proximal subgradient descent with block soft-thresholding of the P1
// vectors, cap projection and R0 rescaling
TrainResult train(const ornn::ParamSet& init, const TrainingSet& s, const TrainConfig& cfg);

// ---- bound calculators ----

struct SparsityBudget {
  long n1 = 0;          // saturated at LONG_MAX on overflow
  long n0 = 0;          // 2L + N1
  bool saturated = false;
  double log10_n1 = 0.0;
};
enum class BudgetFlavor { FromR0, FromL0 };
SparsityBudget sparsity_budget(int depth, double alpha, double r0_or_l0, BudgetFlavor flavor);

enum class BoundFlavor { CaseI, CaseII };
struct BoundReport {
  BoundFlavor flavor = BoundFlavor::CaseI;
  // natural-log values of C1 and C2 (always finite for admissible inputs)
  double ln_c1 = 0.0;
  double ln_c2 = 0.0;
  double log10_c1 = 0.0;
  double log10_c2 = 0.0;
  // raw values when representable in double, else +inf
  double c1 = 0.0;
  double c2 = 0.0;
  // inputs echoed
  int depth = 0;
  int width = 0;
  double alpha = 0.0;
  double f_inf = 0.0;
  double l0 = 0.0, r0 = 0.0, eps0 = 0.0;

  // log10 of the failure-probability bound C1 delta^{-C2} exp(-2 s delta^2 / ((5n)^2 |f|^4))
  double log10_bound(double delta, double s) const;
  // smallest sample count making the bound <= target at the given delta
  double min_samples(double delta, double target = 0.05) const;
};

BoundReport generalization_constants_case_i(int depth, int width, double alpha, double f_inf,
                                            double l0);
BoundReport generalization_constants_case_ii(int depth, int width, double alpha, double f_inf,
                                             double r0, double eps0);

struct CoveringBound {
  double log10_count = 0.0;          // 8^{N0 n} M0 (R0/rho)^{N0 n}
  double perturbation_radius = 0.0;  // 4^{L+1} rho (R0 + 2L) exp(2 R0)
};
CoveringBound covering_size(double r0, long n0, int width, double m0, double rho, int depth);

// |L(theta, S_train) - Lhat(theta, S_test)|
double generalization_gap_estimate(const ornn::ParamSet& params, const TrainingSet& s_train,
                                   const TrainingSet& s_test, double alpha, const Vec& h0);

struct CrossValidationResult {
  double alpha = 0.0;
  std::vector<double> cv_errors;  // per candidate, K-fold mean held-out squared error
};
CrossValidationResult cross_validate_alpha(const ornn::ParamSet& init, const TrainingSet& s,
                                           const std::vector<double>& candidates, int folds,
                                           const TrainConfig& cfg, double slack = 0.05);

// deterministic fixed-order pairwise tree reduction; the result is
// independent of any parallel split
double tree_sum(const std::vector<double>& terms);

// section 4.6 worst-case discretization calculator; constants are user inputs
struct DiscretizationBudget {
  double eps = 0.0;       // delta^270
  double log10_eps = 0.0;
  double n0 = 0.0;        // C eps^{-4/7}
  double k_count = 0.0;   // C eps^{-1/18}
  double depth = 0.0;     // C log(1/delta)
  double width = 0.0;     // C eps^{-9/14}
  double r0 = 0.0;        // C'' delta^{-16}
  double log10_n0 = 0.0, log10_k = 0.0, log10_width = 0.0, log10_r0 = 0.0;
};
DiscretizationBudget discretization_budget(double delta, double C, double Cpp);

}  // namespace ornet::training
