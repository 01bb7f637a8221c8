#pragma once

// Experiment drivers behind the command-line harness. Each driver is a pure
// function of (config, target): cell seeds come from the master seed and the
// cell's grid coordinates, never from execution order, so --jobs does not
// change any output.
//
// Seeding keeps common random numbers across the axes being compared: one
// replica seed is shared by every shot count (and, for the budget study, by
// every gamma), and datasets built from one seed are nested in both size and
// shot count.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <iostream>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "shotlearn/analysis.hpp"
#include "shotlearn/circuit.hpp"
#include "shotlearn/config.hpp"
#include "shotlearn/features.hpp"
#include "shotlearn/fourier.hpp"
#include "shotlearn/io.hpp"
#include "shotlearn/learner.hpp"
#include "shotlearn/sampling.hpp"
#include "shotlearn/stats.hpp"

namespace shotlearn::experiments {

enum Stream : std::uint64_t {
  kAsymmetry = 1,
  kSingleShot = 2,
  kBiasVariance = 3,
  kTradeoff = 4,
  kLearn = 5,
  kBootstrap = 6,
};

struct Target {
  ReuploadingParams params;
  std::uint64_t seed = 0;
  std::string ref;

  double operator()(double x) const { return eval_circuit(params, x); }
};

inline Target make_target(const ExperimentConfig& c) {
  if (!c.target_file.empty()) {
    try {
      io::TargetRecord rec = io::read_target(c.target_file);
      return {std::move(rec.params), rec.seed, c.target_file};
    } catch (const std::exception& e) {
      throw ConfigError(std::string("target_file: ") + e.what());
    }
  }
  return {ReuploadingParams::random(c.layers, c.target_seed), c.target_seed,
          "generated:layers=" + std::to_string(c.layers) + ":seed=" + std::to_string(c.target_seed)};
}

/// n equispaced test inputs 2 pi j / n on [0, 2 pi).
inline std::vector<double> test_grid(std::size_t n) {
  std::vector<double> xs(n);
  for (std::size_t j = 0; j < n; ++j)
    xs[j] = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
  return xs;
}

inline std::vector<double> evaluate(const Target& f, const std::vector<double>& xs) {
  std::vector<double> out(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) out[j] = f(xs[j]);
  return out;
}

inline double mean_squared_error(const std::vector<double>& pred, const std::vector<double>& truth) {
  double s = 0.0;
  for (std::size_t j = 0; j < pred.size(); ++j) s += (pred[j] - truth[j]) * (pred[j] - truth[j]);
  return s / static_cast<double>(pred.size());
}

struct ReplicaData {
  LabeledDataset train;
  LabeledDataset val;
};

/// Training set from stream {0} of the replica seed, validation set from {1}.
inline ReplicaData replica_data(const Target& f, std::size_t n1, std::size_t n2, std::size_t ns,
                                std::uint64_t replica_seed) {
  ReplicaData d{build_dataset(f.params, n1, ns, derive_seed(replica_seed, {0})),
                build_dataset(f.params, n2, ns, derive_seed(replica_seed, {1}))};
  d.train.target_ref = d.val.target_ref = f.ref;
  return d;
}

struct Fit {
  TrainedHypothesis hypothesis;
  double reg = 0.0;  // selected C for the identity link
};

/// clip01 trains with the Alphatron loop; identity fits ridge ERM with C
/// chosen on the validation set.
inline Fit fit_model(const ReplicaData& data, const FeatureMap& map, LinkKind link, const ExperimentConfig& c,
                     TrainingForm form = TrainingForm::automatic) {
  if (link == LinkKind::clip01) {
    AlphatronOptions opt;
    opt.rate = c.rate;
    opt.iters = c.iters;
    opt.form = form;
    return {alphatron_train(data.train, data.val, map, LinkFunction::clip(), opt), 0.0};
  }
  ErmSelection sel = erm_select(data.train, data.val, map, c.c_grid);
  return {std::move(sel.hypothesis), sel.reg};
}

/// Runs compute(i) for i in [0, cells) on `jobs` threads and hands results to
/// sink(i, result) strictly in index order from a single thread at a time.
template <class Result>
void run_cells(std::size_t cells, unsigned jobs, const std::function<Result(std::size_t)>& compute,
               const std::function<void(std::size_t, Result&)>& sink) {
  if (jobs <= 1 || cells <= 1) {
    for (std::size_t i = 0; i < cells; ++i) {
      Result r = compute(i);
      sink(i, r);
    }
    return;
  }
  std::vector<std::optional<Result>> slots(cells);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  std::size_t flushed = 0;
  std::exception_ptr error;

  const auto worker = [&] {
    while (!stop.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells) return;
      try {
        Result r = compute(i);
        std::lock_guard<std::mutex> lock(mu);
        slots[i] = std::move(r);
        while (flushed < cells && slots[flushed]) {
          sink(flushed, *slots[flushed]);
          slots[flushed].reset();
          ++flushed;
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
        stop = true;
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned n = static_cast<unsigned>(std::min<std::size_t>(jobs, cells));
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

template <class Row>
using RowSink = std::function<void(const Row&)>;

using Logger = std::function<void(const std::string&)>;

inline void log_stderr(const std::string& msg) { std::cerr << msg << '\n'; }

// ---------------------------------------------------------------- asymmetry

struct AsymmetryRow {
  std::size_t n1 = 0, n2 = 0, ns = 0, replica = 0;
  double explicit_risk = 0.0;
  std::size_t selected_iter = 0;
};

/// Every (N1, Ns, replica) cell: train on N1 inputs with Ns shots each and
/// report the explicit risk on the test grid.
inline std::vector<AsymmetryRow> sweep_asymmetry(const ExperimentConfig& c, const Target& f,
                                                 const RowSink<AsymmetryRow>& sink = {}) {
  const auto xs = test_grid(c.test_points);
  const auto truth = evaluate(f, xs);
  const FeatureMap map = FeatureMap::truncated(c.d);
  const std::size_t nn = c.ns_grid.size(), nr = c.replicas;

  std::vector<AsymmetryRow> rows;
  run_cells<AsymmetryRow>(
      c.n1_grid.size() * nn * nr, c.jobs,
      [&](std::size_t cell) {
        const std::size_t i1 = cell / (nn * nr), is = (cell / nr) % nn, r = cell % nr;
        const std::size_t n1 = c.n1_grid[i1], n2 = c.n2_for(i1), ns = c.ns_grid[is];
        const auto data = replica_data(f, n1, n2, ns, derive_seed(c.seed, {kAsymmetry, i1, r}));
        const Fit fit = fit_model(data, map, LinkKind::clip01, c);
        return AsymmetryRow{n1, n2, ns, r, mean_squared_error(fit.hypothesis.predict(xs), truth),
                            fit.hypothesis.selected_iteration};
      },
      [&](std::size_t, AsymmetryRow& row) {
        if (sink) sink(row);
        rows.push_back(row);
      });
  return rows;
}

// ---------------------------------------------------------------- single shot

struct SingleShotRow {
  std::size_t n1 = 0, n2 = 0, ns = 0, replicas = 0;
  double mean_risk = 0.0, std_risk = 0.0;
  std::vector<double> replica_risks;
  std::vector<double> mean_prediction, std_prediction;  // over replicas, per test input
};

struct SingleShotResult {
  std::vector<double> xs, truth;
  std::vector<SingleShotRow> rows;
};

/// Primal-form training at large N1; one row per (N1, Ns) aggregating the replicas.
inline SingleShotResult single_shot_scaling(const ExperimentConfig& c, const Target& f,
                                            const RowSink<SingleShotRow>& sink = {}) {
  SingleShotResult out{test_grid(c.test_points), {}, {}};
  out.truth = evaluate(f, out.xs);
  const FeatureMap map = FeatureMap::truncated(c.d);
  const std::size_t nn = c.ns_grid.size(), nr = c.replicas;

  struct Cell {
    std::vector<double> pred;
    double risk;
  };
  std::vector<std::vector<double>> preds;
  std::vector<double> risks;
  run_cells<Cell>(
      c.n1_grid.size() * nn * nr, c.jobs,
      [&](std::size_t cell) {
        const std::size_t i1 = cell / (nn * nr), is = (cell / nr) % nn, r = cell % nr;
        const auto data =
            replica_data(f, c.n1_grid[i1], c.n2_for(i1), c.ns_grid[is], derive_seed(c.seed, {kSingleShot, i1, r}));
        const Fit fit = fit_model(data, map, LinkKind::clip01, c, TrainingForm::primal);
        Cell res{fit.hypothesis.predict(out.xs), 0.0};
        res.risk = mean_squared_error(res.pred, out.truth);
        return res;
      },
      [&](std::size_t cell, Cell& res) {
        preds.push_back(std::move(res.pred));
        risks.push_back(res.risk);
        if (cell % nr != nr - 1) return;
        const std::size_t i1 = cell / (nn * nr), is = (cell / nr) % nn;
        SingleShotRow row{c.n1_grid[i1], c.n2_for(i1), c.ns_grid[is], nr, stats::mean(risks), stats::stddev(risks),
                          risks, {}, {}};
        std::vector<double> column(nr);
        for (std::size_t j = 0; j < out.xs.size(); ++j) {
          for (std::size_t k = 0; k < nr; ++k) column[k] = preds[k][j];
          row.mean_prediction.push_back(stats::mean(column));
          row.std_prediction.push_back(stats::stddev(column));
        }
        preds.clear();
        risks.clear();
        if (sink) sink(row);
        out.rows.push_back(std::move(row));
      });
  return out;
}

// ---------------------------------------------------------------- bias-variance

struct BiasVarianceRow {
  std::size_t n1 = 0, n2 = 0, d = 0, ns = 0;
  LinkKind link = LinkKind::clip01;
  BiasVarianceReport report;
  stats::Interval bias_ci, variance_ci;  // percentile bootstrap over replicas
  std::vector<std::vector<double>> predictions;
};

/// Percentile bootstrap intervals for bias^2 and variance, resampling models.
/// Both statistics see the same resampled index sets.
inline std::pair<stats::Interval, stats::Interval> bootstrap_bias_variance(
    const std::vector<std::vector<double>>& predictions, const std::vector<double>& truth, std::uint64_t seed,
    std::size_t resamples = 1000) {
  const auto stat = [&](bool bias) {
    return [&, bias](std::span<const std::size_t> idx) {
      std::vector<std::vector<double>> sample;
      sample.reserve(idx.size());
      for (std::size_t i : idx) sample.push_back(predictions[i]);
      const auto r = bias_variance_from_predictions(sample, truth);
      return bias ? r.bias_sq : r.variance;
    };
  };
  Rng a(seed), b(seed);
  return {stats::bootstrap(predictions.size(), stat(true), a, resamples),
          stats::bootstrap(predictions.size(), stat(false), b, resamples)};
}

/// Ensembles over (N1, d, Ns, link). A replica's datasets are shared by every
/// d, Ns and link, so the curves differ only through the learner.
inline std::vector<BiasVarianceRow> bias_variance_study(const ExperimentConfig& c, const Target& f,
                                                        const RowSink<BiasVarianceRow>& sink = {}) {
  const auto xs = test_grid(c.test_points);
  const auto truth = evaluate(f, xs);
  constexpr LinkKind links[] = {LinkKind::clip01, LinkKind::identity};
  const std::size_t nd = c.d_grid.size(), nn = c.ns_grid.size(), nr = c.replicas;
  const std::size_t per_n1 = nd * nn * 2 * nr;

  std::vector<BiasVarianceRow> rows;
  std::vector<std::vector<double>> preds;
  run_cells<std::vector<double>>(
      c.n1_grid.size() * per_n1, c.jobs,
      [&](std::size_t cell) {
        const std::size_t i1 = cell / per_n1, id = (cell / (nn * 2 * nr)) % nd, is = (cell / (2 * nr)) % nn,
                          il = (cell / nr) % 2, r = cell % nr;
        const auto data = replica_data(f, c.n1_grid[i1], c.n2_for(i1), c.ns_grid[is],
                                       derive_seed(c.seed, {kBiasVariance, i1, r}));
        return fit_model(data, FeatureMap::truncated(c.d_grid[id]), links[il], c).hypothesis.predict(xs);
      },
      [&](std::size_t cell, std::vector<double>& pred) {
        preds.push_back(std::move(pred));
        if (cell % nr != nr - 1) return;
        const std::size_t i1 = cell / per_n1, id = (cell / (nn * 2 * nr)) % nd, is = (cell / (2 * nr)) % nn,
                          il = (cell / nr) % 2;
        BiasVarianceRow row;
        row.n1 = c.n1_grid[i1];
        row.n2 = c.n2_for(i1);
        row.d = c.d_grid[id];
        row.ns = c.ns_grid[is];
        row.link = links[il];
        row.report = bias_variance_from_predictions(preds, truth, row.ns);
        std::tie(row.bias_ci, row.variance_ci) =
            bootstrap_bias_variance(preds, truth, derive_seed(c.seed, {kBootstrap, cell / nr}));
        row.predictions = std::move(preds);
        preds.clear();
        if (sink) sink(row);
        rows.push_back(std::move(row));
      });
  return rows;
}

// ---------------------------------------------------------------- budget trade-off

struct TradeoffRow {
  double gamma = 0.0;
  std::size_t ns = 0, n1 = 0, n2 = 0, replica = 0;
  double explicit_risk = 0.0;
};

struct TradeoffSummaryRow {
  double gamma = 0.0;
  std::size_t ns = 0, n1 = 0, n2 = 0;
  double mean_risk = 0.0, std_risk = 0.0;
  bool argmin = false;  // lowest mean risk over the Ns grid at this gamma
};

struct TradeoffResult {
  std::vector<TradeoffRow> rows;
  std::vector<TradeoffSummaryRow> summary;

  /// Ns with the lowest mean risk at `gamma`; 0 when the gamma has no feasible cell.
  std::size_t argmin_ns(double gamma) const {
    for (const auto& s : summary)
      if (s.gamma == gamma && s.argmin) return s.ns;
    return 0;
  }
};

/// Fixed budget Ntot split as N1 = N - N2 training and N2 validation inputs
/// with N = floor(Ntot / (Ns + gamma)). Infeasible (gamma, Ns) pairs are
/// skipped and logged; throws InfeasibleBudget if nothing is feasible.
inline TradeoffResult budget_tradeoff(const ExperimentConfig& c, const Target& f,
                                      const RowSink<TradeoffRow>& sink = {}, const Logger& log = log_stderr) {
  const auto xs = test_grid(c.test_points);
  const auto truth = evaluate(f, xs);
  const FeatureMap map = FeatureMap::truncated(c.d);

  struct Pair {
    double gamma;
    std::size_t ns;
    BudgetSplit split;
  };
  std::vector<Pair> pairs;
  for (double g : c.gamma_grid) {
    for (std::size_t ns : c.ns_grid) {
      try {
        pairs.push_back({g, ns, allocate_budget(c.ntot, ns, g, c.train_fraction)});
      } catch (const InfeasibleBudget& e) {
        if (log) log(std::string("skipping infeasible cell: ") + e.what());
      }
    }
  }
  if (pairs.empty()) throw InfeasibleBudget("no feasible (gamma, Ns) pair for budget " + io::format_double(c.ntot));

  const std::size_t nr = c.replicas;
  TradeoffResult out;
  std::vector<double> risks;
  run_cells<TradeoffRow>(
      pairs.size() * nr, c.jobs,
      [&](std::size_t cell) {
        const Pair& p = pairs[cell / nr];
        const std::size_t r = cell % nr;
        const auto data = replica_data(f, p.split.n1, p.split.n2, p.ns, derive_seed(c.seed, {kTradeoff, r}));
        const Fit fit = fit_model(data, map, LinkKind::clip01, c);
        return TradeoffRow{p.gamma, p.ns, p.split.n1, p.split.n2, r,
                           mean_squared_error(fit.hypothesis.predict(xs), truth)};
      },
      [&](std::size_t cell, TradeoffRow& row) {
        if (sink) sink(row);
        out.rows.push_back(row);
        risks.push_back(row.explicit_risk);
        if (cell % nr != nr - 1) return;
        out.summary.push_back({row.gamma, row.ns, row.n1, row.n2, stats::mean(risks), stats::stddev(risks), false});
        risks.clear();
      });

  for (double g : c.gamma_grid) {
    TradeoffSummaryRow* best = nullptr;
    for (auto& s : out.summary)
      if (s.gamma == g && (best == nullptr || s.mean_risk < best->mean_risk)) best = &s;
    if (best != nullptr) best->argmin = true;
  }
  return out;
}

// ---------------------------------------------------------------- bound curves

struct AsymmetryBoundRow {
  std::size_t n1 = 0, ns = 0;
  double cor1 = 0.0, thm1 = 0.0;
};

struct BudgetBoundRow {
  double gamma = 0.0;
  std::size_t ns = 0;
  double n1 = 0.0, bound = 0.0, ns_star = 0.0;
  bool grid_argmin = false;
};

struct BoundCurves {
  std::vector<AsymmetryBoundRow> asymmetry;
  std::vector<BudgetBoundRow> budget;

  std::size_t grid_argmin(double gamma) const {
    for (const auto& r : budget)
      if (r.gamma == gamma && r.grid_argmin) return r.ns;
    return 0;
  }
};

inline BoundCurves bound_curves(const ExperimentConfig& c) {
  BoundCurves out;
  const BoundConstants base = c.bound_constants(0.0);
  for (std::size_t n1 : c.n1_grid)
    for (std::size_t ns : c.ns_grid)
      out.asymmetry.push_back({n1, ns, risk_bound_cor1(base, static_cast<double>(n1), static_cast<double>(ns)),
                               risk_bound_thm1(base, static_cast<double>(n1), static_cast<double>(ns)).total});
  for (double g : c.gamma_grid) {
    const BoundConstants k = c.bound_constants(g);
    const double star = optimal_shots(k);
    const std::size_t first = out.budget.size();
    for (std::size_t ns : c.ns_grid) {
      const double nsd = static_cast<double>(ns);
      if (nsd + g > c.ntot) continue;
      out.budget.push_back({g, ns, c.ntot / (nsd + g), budget_bound(k, c.ntot, nsd), star, false});
    }
    std::size_t best = first;
    for (std::size_t i = first; i < out.budget.size(); ++i)
      if (out.budget[i].bound < out.budget[best].bound) best = i;
    if (best < out.budget.size()) out.budget[best].grid_argmin = true;
  }
  return out;
}

// ---------------------------------------------------------------- single run

struct LearnResult {
  ReplicaData data;
  LabeledDataset test_noisy;  // noisy labels on uniformly drawn inputs
  Fit fit;
  RiskReport risks;
};

/// One training run at n1_grid[0], ns_grid[0] with the configured map and link.
inline LearnResult learn(const ExperimentConfig& c, const Target& f) {
  const std::size_t n1 = c.n1_grid.front(), n2 = c.n2_for(0), ns = c.ns_grid.front();
  ReplicaData data = replica_data(f, n1, n2, ns, derive_seed(c.seed, {kLearn, 0}));
  LabeledDataset test_noisy = build_dataset(f.params, c.test_points, ns, derive_seed(c.seed, {kLearn, 1}));
  test_noisy.target_ref = f.ref;

  const auto make_map = [&] {
    switch (c.map) {
      case MapKind::full: return FeatureMap::full(extract_series(f.params));
      case MapKind::rff: {
        Rng rng(derive_seed(c.seed, {kLearn, 2}));
        return sample_rff_map(extract_series(f.params), c.rff_features, rng);
      }
      case MapKind::truncated: break;
    }
    return FeatureMap::truncated(c.d);
  };
  Fit fit = fit_model(data, make_map(), c.link, c);
  const auto xs = test_grid(c.test_points);
  RiskReport risks = estimate_risks(fit.hypothesis, f, xs, &test_noisy, &data.train);
  return {std::move(data), std::move(test_noisy), std::move(fit), risks};
}

}  // namespace shotlearn::experiments
