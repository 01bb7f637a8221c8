#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "shotlearn/features.hpp"
#include "shotlearn/sampling.hpp"

namespace shotlearn {

/// Clipping link: 0 below 0, identity on [0, 1], 1 above 1.
constexpr double clip01(double v) noexcept { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

enum class LinkKind { clip01, identity };

struct LinkFunction {
  LinkKind kind = LinkKind::clip01;

  static constexpr LinkFunction clip() { return {LinkKind::clip01}; }
  static constexpr LinkFunction identity() { return {LinkKind::identity}; }

  /// Both links are 1-Lipschitz.
  constexpr double lipschitz() const noexcept { return 1.0; }

  constexpr double operator()(double v) const noexcept {
    return kind == LinkKind::clip01 ? shotlearn::clip01(v) : v;
  }

  friend constexpr bool operator==(LinkFunction, LinkFunction) = default;
};

inline std::string_view to_string(LinkKind k) { return k == LinkKind::clip01 ? "clip01" : "identity"; }

inline LinkKind parse_link_kind(std::string_view s) {
  if (s == "clip01") return LinkKind::clip01;
  if (s == "identity") return LinkKind::identity;
  throw std::invalid_argument("unknown link function: " + std::string(s));
}

/// h(x) = u(<w, phi(x)>) in primal form or u(sum_i alpha_i k(x, x_i)) in dual form.
struct TrainedHypothesis {
  FeatureMap map;
  LinkFunction link;
  std::vector<double> weights;     // primal
  std::vector<double> alphas;      // dual
  std::vector<double> support_xs;  // dual
  std::size_t selected_iteration = 0;
  std::vector<double> history;     // validation risk of h^t, t = 1..T
  bool validation_fallback = false;

  bool is_primal() const noexcept { return !weights.empty(); }

  /// Pre-link output.
  double score(double x) const {
    double s = 0.0;
    if (is_primal()) {
      const std::vector<double> phi = map.phi(x);
      for (std::size_t j = 0; j < phi.size(); ++j) s += weights[j] * phi[j];
    } else {
      for (std::size_t i = 0; i < alphas.size(); ++i) s += alphas[i] * map.kernel(x, support_xs[i]);
    }
    return s;
  }

  double predict(double x) const { return link(score(x)); }

  std::vector<double> predict(std::span<const double> xs) const {
    std::vector<double> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = predict(xs[i]);
    return out;
  }

  /// Primal weights equivalent to a dual hypothesis: w = sum_i alpha_i phi(x_i).
  std::vector<double> primal_weights() const {
    if (is_primal()) return weights;
    std::vector<double> w(map.dimension(), 0.0), phi(map.dimension());
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      map.phi_into(support_xs[i], phi);
      for (std::size_t j = 0; j < w.size(); ++j) w[j] += alphas[i] * phi[j];
    }
    return w;
  }
};

enum class TrainingForm { automatic, primal, dual };

struct AlphatronOptions {
  double rate = 1.0;  // 1 / L for the 1-Lipschitz links
  std::size_t iters = 50;
  /// Feature dimensions up to this size train in primal form when automatic.
  std::size_t primal_threshold = 4096;
  /// The dual form stores an N1 x N1 Gram matrix; larger training sets must be primal.
  std::size_t max_dual_points = 4096;
  TrainingForm form = TrainingForm::automatic;
};

namespace detail {

inline Eigen::MatrixXd feature_matrix(const FeatureMap& map, std::span<const double> xs) {
  Eigen::MatrixXd phi(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(map.dimension()));
  std::vector<double> row(map.dimension());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    map.phi_into(xs[i], row);
    for (std::size_t j = 0; j < row.size(); ++j)
      phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }
  return phi;
}

inline Eigen::MatrixXd gram_matrix(const FeatureMap& map, std::span<const double> rows,
                                   std::span<const double> cols) {
  Eigen::MatrixXd k(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = map.kernel(rows[i], cols[j]);
  return k;
}

inline double mean_squared_gap(const Eigen::VectorXd& scores, std::span<const double> labels,
                               LinkFunction link) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < scores.size(); ++j) {
    const double r = labels[static_cast<std::size_t>(j)] - link(scores(j));
    s += r * r;
  }
  return s / static_cast<double>(scores.size());
}

inline std::span<const double> as_span(const std::vector<double>& v) { return {v.data(), v.size()}; }

}  // namespace detail

/// Kernelized link-function learner with post-hoc iteration selection.
///
/// alpha^1 = 0; for t = 1..T:
///   h^t(x) = u(sum_i alpha_i^t k(x, x_i))
///   alpha_i^{t+1} = alpha_i^t + rate / N1 * (ybar_i - h^t(x_i))
/// and the output is h^r with r minimizing the validation risk of h^t
/// (smallest t on ties). Validation uses the noisy labels of `val`.
///
/// The primal form tracks w^t = sum_i alpha_i^t phi(x_i) instead of alpha and
/// costs O(N1 * dim) per round; both forms produce the same hypotheses.
inline TrainedHypothesis alphatron_train(const LabeledDataset& train, const LabeledDataset& val,
                                         const FeatureMap& map, LinkFunction link,
                                         const AlphatronOptions& opt = {}) {
  train.validate();
  val.validate();
  if (train.empty()) throw std::invalid_argument("alphatron: empty training set");
  if (!(opt.rate > 0.0) || !std::isfinite(opt.rate))
    throw std::invalid_argument("alphatron: learning rate must be positive");
  if (opt.iters == 0) throw std::invalid_argument("alphatron: need at least one iteration");

  bool primal = opt.form == TrainingForm::primal ||
                (opt.form == TrainingForm::automatic && map.dimension() <= opt.primal_threshold);
  if (!primal && train.size() > opt.max_dual_points)
    throw std::length_error("alphatron: dual form limited to " + std::to_string(opt.max_dual_points) +
                            " training points; use the primal form");

  const std::size_t n = train.size();
  const double step = opt.rate / static_cast<double>(n);
  const bool have_val = !val.empty();

  TrainedHypothesis out{map, link, {}, {}, {}, 0, {}, !have_val};
  out.history.reserve(opt.iters);

  const auto tx = detail::as_span(train.xs);
  const auto vx = detail::as_span(val.xs);
  const auto ty = detail::as_span(train.ys);
  const auto vy = detail::as_span(val.ys);

  // The rows of `design` map the current parameters to training-point scores.
  Eigen::MatrixXd design, val_design;
  Eigen::VectorXd params;
  if (primal) {
    design = detail::feature_matrix(map, tx);
    if (have_val) val_design = detail::feature_matrix(map, vx);
    params = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(map.dimension()));
  } else {
    design = detail::gram_matrix(map, tx, tx);
    if (have_val) val_design = detail::gram_matrix(map, vx, tx);
    params = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  }

  double best_risk = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best = params;
  std::size_t best_t = 0;
  Eigen::VectorXd residual(static_cast<Eigen::Index>(n));

  for (std::size_t t = 1; t <= opt.iters; ++t) {
    if (have_val) {
      const double risk = detail::mean_squared_gap(val_design * params, vy, link);
      out.history.push_back(risk);
      if (risk < best_risk) {
        best_risk = risk;
        best = params;
        best_t = t;
      }
    }
    if (!have_val && t == opt.iters) {
      best = params;
      best_t = t;
    }
    if (t == opt.iters) break;  // alpha^{T+1} is never evaluated

    const Eigen::VectorXd scores = design * params;
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      residual(ii) = step * (ty[i] - link(scores(ii)));
    }
    if (primal)
      params.noalias() += design.transpose() * residual;
    else
      params += residual;
  }

  out.selected_iteration = best_t;
  if (primal) {
    out.weights.assign(best.data(), best.data() + best.size());
  } else {
    out.alphas.assign(best.data(), best.data() + best.size());
    out.support_xs = train.xs;
  }
  return out;
}

/// Ridge form of the norm-constrained least-squares program:
///   minimize (1/N) sum_i (<w, phi(x_i)> - ybar_i)^2 + C ||w||^2 / N,
/// solved from (Phi^T Phi + C I) w = Phi^T y. At C = 0 the minimum-norm
/// least-squares solution is returned (pseudo-inverse).
inline TrainedHypothesis erm_fit(const LabeledDataset& train, const FeatureMap& map, double reg) {
  train.validate();
  if (train.empty()) throw std::invalid_argument("erm: empty training set");
  if (!(reg >= 0.0) || !std::isfinite(reg)) throw std::invalid_argument("erm: C must be >= 0");

  const Eigen::MatrixXd phi = detail::feature_matrix(map, detail::as_span(train.xs));
  const Eigen::Map<const Eigen::VectorXd> y(train.ys.data(), static_cast<Eigen::Index>(train.size()));

  Eigen::VectorXd w;
  if (reg > 0.0) {
    Eigen::MatrixXd a = phi.transpose() * phi;
    a.diagonal().array() += reg;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) throw std::runtime_error("erm: normal equations not SPD");
    w = llt.solve(phi.transpose() * y);
  } else {
    w = phi.completeOrthogonalDecomposition().solve(y);
  }

  TrainedHypothesis h{map, LinkFunction::identity(), {}, {}, {}, 0, {}, false};
  h.weights.assign(w.data(), w.data() + w.size());
  return h;
}

/// Regularization grid used for the identity-link baseline.
inline const std::vector<double>& default_c_grid() {
  static const std::vector<double> grid{0.006, 0.015, 0.03, 0.0625, 0.125, 0.25, 0.5, 1.0, 2.0,
                                        5.0,   8.0,   16.0, 32.0,   64.0,  128.0, 256, 512, 1024};
  return grid;
}

struct ErmSelection {
  TrainedHypothesis hypothesis;
  double reg = 0.0;
  std::vector<double> validation_risks;
};

/// Fits erm_fit for every C in the grid and keeps the one with the lowest
/// validation risk (first on ties).
inline ErmSelection erm_select(const LabeledDataset& train, const LabeledDataset& val,
                               const FeatureMap& map, std::span<const double> c_grid) {
  if (c_grid.empty()) throw std::invalid_argument("erm: empty regularization grid");
  if (val.empty()) throw std::invalid_argument("erm: regularization selection needs validation data");
  std::optional<ErmSelection> best;
  std::vector<double> risks;
  double best_risk = std::numeric_limits<double>::infinity();
  for (double c : c_grid) {
    TrainedHypothesis h = erm_fit(train, map, c);
    double r = 0.0;
    for (std::size_t j = 0; j < val.size(); ++j) {
      const double d = h.predict(val.xs[j]) - val.ys[j];
      r += d * d;
    }
    r /= static_cast<double>(val.size());
    risks.push_back(r);
    if (r < best_risk) {
      best_risk = r;
      best = ErmSelection{std::move(h), c, {}};
    }
  }
  best->validation_risks = std::move(risks);
  return std::move(*best);
}

/// Risks of a hypothesis against a target p-concept f.
struct RiskReport {
  double explicit_risk = 0.0;               // mean (h - f)^2 over test inputs
  std::optional<double> implicit_risk;      // mean (h - ybar)^2 over the noisy test set
  std::optional<double> empirical_risk;     // mean (h - ybar)^2 over the training sample
  std::optional<double> noise_floor;        // mean (f - ybar)^2 over the noisy test set
};

/// `target` is any callable double -> double returning f(x).
template <class Target>
RiskReport estimate_risks(const TrainedHypothesis& h, const Target& target, std::span<const double> test_xs,
                          const LabeledDataset* test_noisy = nullptr, const LabeledDataset* train = nullptr) {
  if (test_xs.empty()) throw std::invalid_argument("estimate_risks: no test inputs");
  RiskReport r;
  double s = 0.0;
  for (double x : test_xs) {
    const double d = h.predict(x) - target(x);
    s += d * d;
  }
  r.explicit_risk = s / static_cast<double>(test_xs.size());

  const auto noisy_mean = [&](const LabeledDataset& data, auto&& fn) {
    double acc = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double d = fn(data.xs[i]) - data.ys[i];
      acc += d * d;
    }
    return acc / static_cast<double>(data.size());
  };
  const auto hyp = [&](double x) { return h.predict(x); };

  if (test_noisy != nullptr && !test_noisy->empty()) {
    r.implicit_risk = noisy_mean(*test_noisy, hyp);
    r.noise_floor = noisy_mean(*test_noisy, target);
  }
  if (train != nullptr && !train->empty())
    r.empirical_risk = noisy_mean(*train, hyp);
  else if (r.implicit_risk)
    r.empirical_risk = r.implicit_risk;
  return r;
}

}  // namespace shotlearn
