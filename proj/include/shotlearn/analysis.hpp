#pragma once

// Bias-variance decomposition of trained ensembles and closed-form risk-bound
// curves. Every big-O constant in the bounds is taken as 1, so the bounds are
// shapes for comparing (N1, Ns) allocations, not certified numbers.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "shotlearn/learner.hpp"

namespace shotlearn {

struct BoundConstants {
  double c1 = 1.0, c2 = 1.0, c3 = 1.0;
  double L = 1.0, B = 1.0, Delta = 1.0, sigma_bar = 1.0;
  double delta = 0.01;
  double eps1 = 0.0, M = 0.0, D = 1.0;
  double gamma = 0.0;

  void validate() const {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("bound constants: delta must lie in (0, 1)");
    for (double v : {c1, c2, c3, L, B, Delta, sigma_bar, eps1, M, D, gamma})
      if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument("bound constants must be finite and non-negative");
  }

  double log_inv_delta() const { return std::log(1.0 / delta); }

  /// Sets c1..c3 from the learner constants: c1 = L B Delta,
  /// c2 = L B sqrt(sigma_bar log(1/delta)), c3 = Delta^2 sqrt(log(1/delta)).
  BoundConstants with_derived_c() const {
    BoundConstants r = *this;
    r.c1 = L * B * Delta;
    r.c2 = L * B * std::sqrt(sigma_bar * log_inv_delta());
    r.c3 = Delta * Delta * std::sqrt(log_inv_delta());
    return r;
  }
};

namespace detail {
inline void require_count(double n, const char* what) {
  if (!(n >= 1.0)) throw std::invalid_argument(std::string(what) + " must be >= 1");
}
}  // namespace detail

/// c1 sqrt(1/N1) + c2 sqrt(1/(N1 Ns)) + c3 sqrt(1/N1)
inline double risk_bound_cor1(const BoundConstants& c, double n1, double ns) {
  detail::require_count(n1, "N1");
  detail::require_count(ns, "Ns");
  return c.c1 * std::sqrt(1.0 / n1) + c.c2 * std::sqrt(1.0 / (n1 * ns)) + c.c3 * std::sqrt(1.0 / n1);
}

struct BoundBreakdown {
  double total = 0.0;
  double eps2 = 0.0, eps3 = 0.0, eps4 = 0.0, eps5 = 0.0;
  /// L Delta sqrt(eps1), L Delta M eps2, L B Delta eps3, L B eps4, Delta^2 eps5
  double approximation = 0.0, data_sampling = 0.0, learnability = 0.0, label_sampling = 0.0,
         data_sampling_tail = 0.0;
};

inline BoundBreakdown risk_bound_thm1(const BoundConstants& c, double n1, double ns) {
  detail::require_count(n1, "N1");
  detail::require_count(ns, "Ns");
  c.validate();
  const double lg = c.log_inv_delta();
  BoundBreakdown b;
  b.eps2 = std::pow(lg / n1, 0.25);
  b.eps3 = std::sqrt(1.0 / n1);
  b.eps4 = std::sqrt(c.sigma_bar * lg / (n1 * ns));
  b.eps5 = std::sqrt(lg / n1);
  b.approximation = c.L * c.Delta * std::sqrt(c.eps1);
  b.data_sampling = c.L * c.Delta * c.M * b.eps2;
  b.learnability = c.L * c.B * c.Delta * b.eps3;
  b.label_sampling = c.L * c.B * b.eps4;
  b.data_sampling_tail = c.Delta * c.Delta * b.eps5;
  b.total = b.approximation + b.data_sampling + b.learnability + b.label_sampling + b.data_sampling_tail;
  return b;
}

/// Link-function learner with a D-frequency random feature map:
///   sqrt(eps1) + M eps2 + D (eps3 + eps4) + eps5
inline double rff_risk_bound(const BoundConstants& c, double n1, double ns) {
  const BoundBreakdown b = risk_bound_thm1(c, n1, ns);
  return std::sqrt(c.eps1) + c.M * b.eps2 + c.D * (b.eps3 + b.eps4) + b.eps5;
}

/// Identity-link ERM: eps1 + D^2 sqrt(log(1/delta) / N1)
inline double erm_bound(const BoundConstants& c, double n1) {
  detail::require_count(n1, "N1");
  c.validate();
  return c.eps1 + c.D * c.D * std::sqrt(c.log_inv_delta() / n1);
}

/// Fixed budget Ntot = N1 (Ns + gamma):
///   (c1 + c3) sqrt((Ns + g)/Ntot) + c2 sqrt((Ns + g)/(Ntot Ns))
inline double budget_bound(const BoundConstants& c, double ntot, double ns) {
  detail::require_count(ns, "Ns");
  if (!(ntot >= ns + c.gamma)) throw std::invalid_argument("budget bound: Ntot < Ns + gamma");
  const double r = (ns + c.gamma) / ntot;
  return c.c1 * std::sqrt(r) + c.c2 * std::sqrt(r / ns) + c.c3 * std::sqrt(r);
}

/// Continuous minimizer of budget_bound over Ns: (c2 gamma / (c1 + c3))^(2/3).
/// Zero at gamma = 0, which callers read as "one shot".
inline double optimal_shots(const BoundConstants& c) {
  if (!(c.c1 + c.c3 > 0.0)) throw std::domain_error("optimal shots: c1 + c3 must be positive");
  return std::cbrt(std::pow(c.c2 * c.gamma / (c.c1 + c.c3), 2.0));
}

struct OptimalAllocation {
  double ns = 0.0;
  double n1 = 0.0;
};

inline OptimalAllocation optimal_allocation(const BoundConstants& c, double ntot) {
  const double ns = optimal_shots(c);
  return {ns, ntot / (ns + c.gamma)};
}

/// Experiment code uses an integer shot count: max(1, round(Ns*)).
inline std::size_t clamp_shots(double ns_star) {
  const double r = std::round(ns_star);
  return r < 1.0 ? 1 : static_cast<std::size_t>(r);
}

/// Raised when a budget cannot fund a single training point.
class InfeasibleBudget : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BudgetSplit {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
};

/// N = floor(Ntot / (Ns + gamma)); N2 = max(1, round((1 - f) N)); N1 = N - N2.
inline BudgetSplit allocate_budget(double ntot, std::size_t ns, double gamma, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("train fraction must lie in (0, 1)");
  if (ns == 0 || !(gamma >= 0.0)) throw std::invalid_argument("budget: need Ns >= 1 and gamma >= 0");
  const double total = std::floor(ntot / (static_cast<double>(ns) + gamma));
  const auto n = static_cast<std::size_t>(total > 0.0 ? total : 0.0);
  const auto n2 = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround((1.0 - train_fraction) *
                                                                                  static_cast<double>(n))));
  if (n <= n2)
    throw InfeasibleBudget("budget " + std::to_string(ntot) + " cannot fund a training point at Ns=" +
                           std::to_string(ns) + ", gamma=" + std::to_string(gamma));
  return {n - n2, n2};
}

struct BiasVarianceReport {
  double bias_sq = 0.0;
  double variance = 0.0;
  double mean_explicit_risk = 0.0;
  std::size_t ensemble_size = 0;
  std::size_t shots = 0;
};

/// predictions[s][j] = h_s(x_j); truth[j] = f(x_j).
///   bias_sq  = mean_j (hbar_j - f_j)^2
///   variance = mean_{j,s} (hbar_j - h_s(x_j))^2
/// mean_explicit_risk = bias_sq + variance up to rounding.
inline BiasVarianceReport bias_variance_from_predictions(const std::vector<std::vector<double>>& predictions,
                                                         std::span<const double> truth, std::size_t shots = 0) {
  const std::size_t models = predictions.size();
  if (models < 2) throw std::invalid_argument("bias-variance: ensemble needs at least two models");
  if (truth.empty()) throw std::invalid_argument("bias-variance: no test inputs");
  for (const auto& p : predictions)
    if (p.size() != truth.size()) throw std::invalid_argument("bias-variance: prediction length mismatch");

  const double inv_m = 1.0 / static_cast<double>(models);
  const double inv_n = 1.0 / static_cast<double>(truth.size());
  BiasVarianceReport r;
  r.ensemble_size = models;
  r.shots = shots;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    double mean = 0.0;
    for (const auto& p : predictions) mean += p[j];
    mean *= inv_m;
    const double bias = mean - truth[j];
    r.bias_sq += bias * bias;
    double var = 0.0;
    for (const auto& p : predictions) var += (mean - p[j]) * (mean - p[j]);
    r.variance += var * inv_m;
  }
  r.bias_sq *= inv_n;
  r.variance *= inv_n;

  for (const auto& p : predictions) {
    double risk = 0.0;
    for (std::size_t j = 0; j < truth.size(); ++j) risk += (p[j] - truth[j]) * (p[j] - truth[j]);
    r.mean_explicit_risk += risk * inv_n;
  }
  r.mean_explicit_risk *= inv_m;
  return r;
}

template <class Target>
BiasVarianceReport bias_variance(std::span<const TrainedHypothesis> ensemble, const Target& target,
                                 std::span<const double> test_xs, std::size_t shots = 0) {
  std::vector<std::vector<double>> preds;
  preds.reserve(ensemble.size());
  for (const auto& h : ensemble) preds.push_back(h.predict(test_xs));
  std::vector<double> truth(test_xs.size());
  for (std::size_t j = 0; j < test_xs.size(); ++j) truth[j] = target(test_xs[j]);
  return bias_variance_from_predictions(preds, truth, shots);
}

}  // namespace shotlearn
