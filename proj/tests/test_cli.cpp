#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "shotlearn/cli.hpp"

using namespace shotlearn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / "shotlearn_cli_test" / name;
  fs::remove_all(p);
  return p;
}

int run(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "shotlearn");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), err);
  if (err_text) *err_text = err.str();
  return code;
}

// Header must match; every cell outside `text_cols` must parse as a number.
io::CsvDocument check_csv(const fs::path& p, std::initializer_list<std::string_view> header,
                          std::initializer_list<std::string_view> text_cols = {}) {
  const auto raw = io::read_file(p);
  EXPECT_EQ(raw.find('\r'), std::string::npos) << p;
  EXPECT_FALSE(raw.empty());
  EXPECT_EQ(raw.back(), '\n');
  auto doc = io::parse_csv(raw);
  doc.expect_header(header);
  for (const auto& row : doc.rows)
    for (std::size_t j = 0; j < row.size(); ++j) {
      const bool text = std::find(text_cols.begin(), text_cols.end(), doc.header[j]) != text_cols.end();
      if (!text) {
        EXPECT_NO_THROW(io::parse_double(row[j])) << p << " " << doc.header[j] << "=" << row[j];
      }
    }
  return doc;
}

const std::vector<std::string> kQuick{"--set", "test_points=32", "--set", "iters=10"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST(Cli, TargetIsReproducibleByteForByte) {
  const auto a = scratch("target_a"), b = scratch("target_b");
  ASSERT_EQ(run({"target", "--out", a.string()}), 0);
  ASSERT_EQ(run({"target", "--out", b.string()}), 0);
  for (const char* f : {"target.txt", "series.csv"})
    EXPECT_EQ(io::read_file(a / f), io::read_file(b / f)) << f;
  const auto rec = io::read_target(a / "target.txt");
  EXPECT_EQ(rec.seed, 7u);
  EXPECT_EQ(rec.params.layers(), 10u);
  const auto s = io::read_series(a / "series.csv");
  EXPECT_EQ(s.degree(), 10u);
  double top = 0.0;
  for (std::size_t w = 0; w < 10; ++w) top = std::max(top, std::hypot(s.a[w], s.b[w]));
  EXPECT_GT(top, 1e-6);
  check_csv(a / "series.csv", {"omega", "a", "b"});
}

TEST(Cli, SingleLayerSeriesReproducesCircuit) {
  const auto d = scratch("target_l1");
  ASSERT_EQ(run({"target", "--seed", "0", "--set", "layers=1", "--out", d.string()}), 0);
  const auto rec = io::read_target(d / "target.txt");
  EXPECT_EQ(rec.seed, 0u);
  const auto s = io::read_series(d / "series.csv");
  EXPECT_EQ(s.degree(), 1u);
  for (int j = 0; j < 100; ++j) {
    const double x = 0.0628 * j;
    EXPECT_NEAR(eval_series(s, x), eval_circuit(rec.params, x), 1e-9);
  }
}

TEST(Cli, ExitCodes) {
  const auto d = scratch("codes");
  std::string err;
  EXPECT_EQ(run({"learn", "--set", "bogus=1", "--out", d.string()}, &err), 2);
  EXPECT_NE(err.find("bogus"), std::string::npos);
  EXPECT_EQ(run({"learn", "--config", (d / "none.conf").string(), "--out", d.string()}), 2);
  EXPECT_EQ(run({"learn", "--frobnicate"}), 2);
  EXPECT_EQ(run({}), 2);
  EXPECT_EQ(run({"learn", "--jobs", "0"}), 2);
  EXPECT_EQ(run({"learn", "--seed", "abc"}), 2);
  EXPECT_EQ(run({"learn", "--set", "n1_grid", "--out", d.string()}), 2);
  EXPECT_EQ(run({"learn", "--set", "target_file=" + (d / "missing.txt").string(), "--out", d.string()}), 2);
  EXPECT_EQ(run({"tradeoff", "--set", "ntot=10", "--set", "ns_grid=25", "--set", "gamma_grid=0", "--out",
                 d.string()},
                &err),
            3);
  EXPECT_NE(err.find("infeasible"), std::string::npos);
  EXPECT_EQ(run({"bounds", "--out", d.string()}), 0);
}

TEST(Cli, ConfigFileAndOverridePrecedence) {
  const auto d = scratch("precedence");
  fs::create_directories(d);
  io::open_out(d / "c.conf") << "seed = 3\nreplicas = 4\nn1_grid = 8\nns_grid = 1, 2\ntest_points = 16\niters = 3\n";
  ASSERT_EQ(run({"sweep-asymmetry", "--config", (d / "c.conf").string(), "--set", "replicas=2", "--out",
                 (d / "a").string()}),
            0);
  const auto doc = check_csv(d / "a" / "asymmetry.csv", {"n1", "n2", "ns", "replica", "explicit_risk", "selected_iter"});
  EXPECT_EQ(doc.rows.size(), 4u);  // 1 n1 x 2 ns x 2 replicas
  ASSERT_EQ(run({"sweep-asymmetry", "--config", (d / "c.conf").string(), "--set", "replicas=2", "--set", "seed=9",
                 "--seed", "3", "--out", (d / "b").string()}),
            0);
  EXPECT_EQ(io::read_file(d / "a" / "asymmetry.csv"), io::read_file(d / "b" / "asymmetry.csv"));
}

TEST(Cli, LearnOutputs) {
  const auto d = scratch("learn");
  ASSERT_EQ(run(with({"learn", "--out", d.string()}, kQuick)), 0);
  const auto train = io::read_dataset(d / "train.csv");
  EXPECT_EQ(train.size(), 40u);
  EXPECT_EQ(train.target_ref, "generated:layers=10:seed=7");
  EXPECT_EQ(io::read_dataset(d / "val.csv").size(), 10u);
  EXPECT_EQ(io::read_dataset(d / "test_noisy.csv").size(), 32u);
  const auto h = io::read_model(d / "model.csv");
  EXPECT_EQ(h.map.dimension(), 21u);
  const auto risks = check_csv(d / "risks.csv", {"explicit_risk", "implicit_risk", "empirical_risk", "noise_floor",
                                                 "selected_iteration", "reg"});
  EXPECT_EQ(risks.rows.size(), 1u);
  const auto id = scratch("learn_identity");
  ASSERT_EQ(run(with({"learn", "--set", "link=identity", "--set", "map=rff", "--out", id.string()}, kQuick)), 0);
  EXPECT_EQ(io::read_model(id / "model.csv").link.kind, LinkKind::identity);
}

TEST(Cli, ExperimentOutputsHaveTheirSchemas) {
  const auto d = scratch("schemas");
  ASSERT_EQ(run(with({"sweep-asymmetry", "--out", (d / "a").string(), "--set", "replicas=1"}, kQuick)), 0);
  EXPECT_EQ(check_csv(d / "a" / "asymmetry.csv", {"n1", "n2", "ns", "replica", "explicit_risk", "selected_iter"})
                .rows.size(),
            12u);

  ASSERT_EQ(run(with({"single-shot-scaling", "--out", (d / "s").string(), "--set", "n1_grid=20,40", "--set",
                      "n2_grid=5,10", "--set", "replicas=2"},
                     kQuick)),
            0);
  EXPECT_EQ(check_csv(d / "s" / "single_shot.csv", {"n1", "n2", "ns", "replicas", "mean_risk", "std_risk"})
                .rows.size(),
            2u);
  EXPECT_EQ(check_csv(d / "s" / "single_shot_predictor.csv",
                      {"n1", "ns", "x", "target", "mean_prediction", "std_prediction"})
                .rows.size(),
            64u);

  ASSERT_EQ(run(with({"bias-variance", "--out", (d / "b").string(), "--set", "replicas=3", "--set", "d_grid=2",
                      "--set", "ns_grid=1,5"},
                     kQuick)),
            0);
  const auto bv = check_csv(d / "b" / "bias_variance.csv",
                            {"n1", "n2", "d", "ns", "link", "replicas", "bias_sq", "variance", "mean_explicit_risk",
                             "bias_sq_lo", "bias_sq_hi", "variance_lo", "variance_hi"},
                            {"link"});
  ASSERT_EQ(bv.rows.size(), 4u);
  EXPECT_EQ(bv.rows[0][4], "clip01");
  EXPECT_EQ(bv.rows[1][4], "identity");

  ASSERT_EQ(run(with({"tradeoff", "--out", (d / "t").string(), "--set", "replicas=2", "--set", "ns_grid=1..3",
                      "--set", "gamma_grid=0,2"},
                     kQuick)),
            0);
  EXPECT_EQ(check_csv(d / "t" / "tradeoff.csv", {"gamma", "ns", "n1", "n2", "replica", "explicit_risk"}).rows.size(),
            12u);
  const auto ts = check_csv(d / "t" / "tradeoff_summary.csv",
                            {"gamma", "ns", "n1", "n2", "replicas", "mean_risk", "std_risk", "argmin"});
  EXPECT_EQ(ts.rows.size(), 6u);

  ASSERT_EQ(run({"bounds", "--out", (d / "bd").string()}), 0);
  EXPECT_EQ(check_csv(d / "bd" / "bounds_asymmetry.csv", {"n1", "ns", "cor1_bound", "thm1_bound"}).rows.size(),
            8u * 25u);
  EXPECT_EQ(check_csv(d / "bd" / "bounds_budget.csv",
                      {"gamma", "ns", "n1", "bound", "ns_star", "ns_star_clamped", "grid_argmin"})
                .rows.size(),
            6u * 25u);
}

TEST(Cli, JobsDoNotChangeOutput) {
  const auto a = scratch("jobs1"), b = scratch("jobs3");
  const std::vector<std::string> args{"--set", "replicas=3", "--set", "ns_grid=1..4", "--set", "gamma_grid=0,3"};
  ASSERT_EQ(run(with(with({"tradeoff", "--out", a.string()}, kQuick), args)), 0);
  ASSERT_EQ(run(with(with({"tradeoff", "--out", b.string(), "--jobs", "3"}, kQuick), args)), 0);
  EXPECT_EQ(io::read_file(a / "tradeoff.csv"), io::read_file(b / "tradeoff.csv"));
  EXPECT_EQ(io::read_file(a / "tradeoff_summary.csv"), io::read_file(b / "tradeoff_summary.csv"));
}

TEST(Cli, GlobalOptionsMayPrecedeTheSubcommand) {
  const auto d = scratch("order");
  ASSERT_EQ(run({"--set", "replicas=2", "--set", "n1_grid=8", "sweep-asymmetry", "--set", "ns_grid=1", "--set",
                 "test_points=16", "--out", d.string()}),
            0);
  EXPECT_EQ(io::read_csv(d / "asymmetry.csv").rows.size(), 2u);
}
