#include <gtest/gtest.h>

#include <filesystem>
#include <numbers>
#include <stdexcept>

#include "shotlearn/experiments.hpp"

using namespace shotlearn;
using namespace shotlearn::experiments;

namespace {

ExperimentConfig quick(Command cmd) {
  auto c = default_config(cmd, false);
  c.test_points = 64;
  c.iters = 20;
  return c;
}

}  // namespace

TEST(Experiments, GeneratedAndLoadedTargetsAgree) {
  ExperimentConfig c;
  const auto gen = make_target(c);
  EXPECT_EQ(gen.ref, "generated:layers=10:seed=7");
  const auto dir = std::filesystem::temp_directory_path() / "shotlearn_exp_test";
  std::filesystem::create_directories(dir);
  io::write_target(dir / "t.txt", {gen.params, gen.seed});
  c.target_file = (dir / "t.txt").string();
  const auto loaded = make_target(c);
  EXPECT_EQ(loaded.seed, 7u);
  for (double x : {0.0, 1.0, 5.5}) EXPECT_EQ(loaded(x), gen(x));
  c.target_file = (dir / "missing.txt").string();
  EXPECT_THROW(make_target(c), ConfigError);
}

TEST(Experiments, TestGridIsEquispaced) {
  const auto xs = test_grid(500);
  ASSERT_EQ(xs.size(), 500u);
  EXPECT_EQ(xs[0], 0.0);
  EXPECT_NEAR(xs[250], std::numbers::pi, 1e-15);
  EXPECT_LT(xs.back(), 2 * std::numbers::pi);
}

TEST(Experiments, ReplicaDataIsNestedAcrossShotCounts) {
  const auto f = make_target(ExperimentConfig{});
  const auto small = replica_data(f, 10, 3, 5, 99), big = replica_data(f, 20, 3, 5, 99);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(small.train.xs[i], big.train.xs[i]);
    EXPECT_EQ(small.train.ys[i], big.train.ys[i]);
  }
  EXPECT_EQ(small.val.xs, big.val.xs);
  EXPECT_NE(small.train.xs[0], small.val.xs[0]);
  EXPECT_EQ(small.train.target_ref, f.ref);
}

TEST(RunCells, OrderedSinkAndExceptionPropagation) {
  for (unsigned jobs : {1u, 4u}) {
    std::vector<std::size_t> seen;
    run_cells<std::size_t>(
        200, jobs, [](std::size_t i) { return i * i; },
        [&](std::size_t i, std::size_t& v) {
          EXPECT_EQ(v, i * i);
          seen.push_back(i);
        });
    ASSERT_EQ(seen.size(), 200u);
    for (std::size_t i = 0; i < seen.size(); ++i) EXPECT_EQ(seen[i], i);
    EXPECT_THROW(run_cells<int>(
                     50, jobs,
                     [](std::size_t i) {
                       if (i == 17) throw std::runtime_error("boom");
                       return 0;
                     },
                     [](std::size_t, int&) {}),
                 std::runtime_error);
  }
}

TEST(SweepAsymmetry, DegenerateGridGivesOneRow) {
  auto c = quick(Command::sweep_asymmetry);
  c.n1_grid = {8};
  c.ns_grid = {1};
  c.replicas = 1;
  const auto rows = sweep_asymmetry(c, make_target(c));
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].n1, 8u);
  EXPECT_EQ(rows[0].n2, 2u);
  EXPECT_GE(rows[0].selected_iter, 1u);
  EXPECT_LE(rows[0].selected_iter, c.iters);
}

TEST(SweepAsymmetry, FullGridRowCountAndThreadIndependence) {
  auto c = default_config(Command::sweep_asymmetry, true);
  c.test_points = 32;
  c.iters = 5;
  const auto f = make_target(c);
  const auto one = sweep_asymmetry(c, f);
  ASSERT_EQ(one.size(), 320u);
  c.jobs = 3;
  std::size_t streamed = 0;
  const auto three = sweep_asymmetry(c, f, [&](const AsymmetryRow&) { ++streamed; });
  EXPECT_EQ(streamed, 320u);
  ASSERT_EQ(three.size(), one.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].n1, three[i].n1);
    EXPECT_EQ(one[i].ns, three[i].ns);
    EXPECT_EQ(one[i].replica, three[i].replica);
    EXPECT_EQ(one[i].explicit_risk, three[i].explicit_risk);
  }
}

TEST(SingleShot, RowsSummarizeReplicas) {
  auto c = quick(Command::single_shot_scaling);
  c.n1_grid = {20, 200};
  c.n2_grid = {5, 50};
  c.replicas = 3;
  const auto res = single_shot_scaling(c, make_target(c));
  ASSERT_EQ(res.rows.size(), 2u);
  for (const auto& r : res.rows) {
    ASSERT_EQ(r.replica_risks.size(), 3u);
    EXPECT_NEAR(r.mean_risk, stats::mean(r.replica_risks), 1e-15);
    EXPECT_NEAR(r.std_risk, stats::stddev(r.replica_risks), 1e-15);
    EXPECT_EQ(r.mean_prediction.size(), 64u);
    EXPECT_EQ(r.std_prediction.size(), 64u);
  }
}

TEST(BiasVarianceStudy, RowLayoutAndDecomposition) {
  auto c = quick(Command::bias_variance);
  c.n1_grid = {20};
  c.n2_grid = {5};
  c.ns_grid = {1, 50};
  c.d_grid = {3};
  c.replicas = 4;
  const auto rows = bias_variance_study(c, make_target(c));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].ns, 1u);
  EXPECT_EQ(rows[0].link, LinkKind::clip01);
  EXPECT_EQ(rows[1].link, LinkKind::identity);
  EXPECT_EQ(rows[2].ns, 50u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.report.ensemble_size, 4u);
    EXPECT_NEAR(r.report.mean_explicit_risk, r.report.bias_sq + r.report.variance, 1e-10);
    EXPECT_LE(r.bias_ci.lo, r.bias_ci.hi);
    EXPECT_LE(r.variance_ci.lo, r.variance_ci.hi);
  }
}

TEST(BiasVarianceStudy, IdenticalEnsembleHasZeroVarianceInterval) {
  const std::vector<double> p{0.1, 0.4, 0.8}, truth{0.2, 0.2, 0.9};
  const auto [bias, var] = bootstrap_bias_variance({p, p, p, p}, truth, 3, 200);
  EXPECT_NEAR(var.lo, 0.0, 1e-16);
  EXPECT_NEAR(var.hi, 0.0, 1e-16);
  EXPECT_NEAR(bias.lo, bias.hi, 1e-16);
}

TEST(Tradeoff, SkipsInfeasiblePairsAndThrowsWhenNoneRemain) {
  auto c = quick(Command::tradeoff);
  c.ntot = 60;
  c.gamma_grid = {0};
  c.ns_grid = {1, 25, 70};
  c.replicas = 2;
  std::vector<std::string> logs;
  const auto res = budget_tradeoff(c, make_target(c), {}, [&](const std::string& m) { logs.push_back(m); });
  EXPECT_EQ(logs.size(), 1u);
  EXPECT_EQ(res.rows.size(), 4u);
  ASSERT_EQ(res.summary.size(), 2u);
  EXPECT_EQ(res.summary[1].n1, 1u);
  EXPECT_EQ(res.summary[1].n2, 1u);
  EXPECT_EQ(res.summary[0].n1, 48u);
  EXPECT_EQ(res.summary[0].n2, 12u);
  int marked = 0;
  for (const auto& s : res.summary) marked += s.argmin;
  EXPECT_EQ(marked, 1);
  c.ntot = 10;
  c.ns_grid = {25};
  EXPECT_THROW(budget_tradeoff(c, make_target(c), {}, {}), InfeasibleBudget);
}

TEST(BoundCurves, ShapesAndMarkers) {
  const auto c = default_config(Command::bounds, false);
  const auto curves = bound_curves(c);
  EXPECT_EQ(curves.asymmetry.size(), c.n1_grid.size() * c.ns_grid.size());
  EXPECT_EQ(curves.grid_argmin(0.0), 1u);
  for (double g : c.gamma_grid) {
    int marks = 0;
    for (const auto& r : curves.budget)
      if (r.gamma == g) marks += r.grid_argmin;
    EXPECT_EQ(marks, 1);
  }
  // at fixed Ns the bound falls with N1
  for (std::size_t ns : c.ns_grid) {
    double prev = 1e300;
    for (const auto& r : curves.asymmetry)
      if (r.ns == ns) {
        EXPECT_LT(r.cor1, prev);
        prev = r.cor1;
      }
  }
  for (const auto& r : curves.budget) EXPECT_NEAR(r.n1, 600.0 / (r.ns + r.gamma), 1e-12);
}

TEST(Learn, ReportsRisksOnTheRightSamples) {
  auto c = quick(Command::learn);
  const auto f = make_target(c);
  const auto res = learn(c, f);
  EXPECT_EQ(res.data.train.size(), 40u);
  EXPECT_EQ(res.data.val.size(), 10u);
  EXPECT_EQ(res.test_noisy.size(), 64u);
  double emp = 0.0;
  for (std::size_t i = 0; i < res.data.train.size(); ++i) {
    const double r = res.fit.hypothesis.predict(res.data.train.xs[i]) - res.data.train.ys[i];
    emp += r * r / 40.0;
  }
  EXPECT_NEAR(*res.risks.empirical_risk, emp, 1e-12);
  c.link = LinkKind::identity;
  c.map = MapKind::rff;
  const auto r2 = learn(c, f);
  EXPECT_EQ(r2.fit.hypothesis.map.kind(), MapKind::rff);
  EXPECT_EQ(r2.fit.hypothesis.map.block_count(), c.rff_features + 1);
  c.map = MapKind::full;
  EXPECT_EQ(learn(c, f).fit.hypothesis.map.frequencies().size(), 10u);
}

TEST(BiasVarianceStudy, BothTermsFallWithShotsAtDefaultSettings) {
  auto c = default_config(Command::bias_variance, false);
  c.d_grid = {10};
  const auto rows = bias_variance_study(c, make_target(c));
  std::vector<const BiasVarianceRow*> clip;
  for (const auto& r : rows)
    if (r.link == LinkKind::clip01) clip.push_back(&r);
  ASSERT_EQ(clip.size(), 3u);
  for (std::size_t i = 1; i < clip.size(); ++i) {
    EXPECT_GT(clip[i]->ns, clip[i - 1]->ns);
    EXPECT_LT(clip[i]->report.bias_sq, clip[i - 1]->report.bias_sq) << "Ns=" << clip[i]->ns;
    EXPECT_LT(clip[i]->report.variance, clip[i - 1]->report.variance) << "Ns=" << clip[i]->ns;
    EXPECT_NEAR(clip[i]->report.mean_explicit_risk, clip[i]->report.bias_sq + clip[i]->report.variance, 1e-10);
  }
}
