#include <gtest/gtest.h>

#include <filesystem>

#include "shotlearn/config.hpp"

using namespace shotlearn;

TEST(Config, ListsRangesAndComments) {
  ExperimentConfig c;
  apply_config_text(c,
                    "# leading comment\n"
                    "n1_grid = [8, 12, 20]   # trailing comment\n"
                    "ns_grid = 1..4, 10\n"
                    "gamma_grid = 0, 0.5, 2..3\n"
                    "\n"
                    "link = identity\n"
                    "map = rff\n"
                    "target_file = \"some/target.txt\"\n"
                    "  seed = 42  \n");
  EXPECT_EQ(c.n1_grid, (std::vector<std::size_t>{8, 12, 20}));
  EXPECT_EQ(c.ns_grid, (std::vector<std::size_t>{1, 2, 3, 4, 10}));
  EXPECT_EQ(c.gamma_grid, (std::vector<double>{0, 0.5, 2, 3}));
  EXPECT_EQ(c.link, LinkKind::identity);
  EXPECT_EQ(c.map, MapKind::rff);
  EXPECT_EQ(c.target_file, "some/target.txt");
  EXPECT_EQ(c.seed, 42u);
}

TEST(Config, EmptyListClearsGrid) {
  ExperimentConfig c;
  apply_config_text(c, "n2_grid = []\n");
  EXPECT_TRUE(c.n2_grid.empty());
}

TEST(Config, UnknownKeysAndBadValuesAreConfigErrors) {
  ExperimentConfig c;
  EXPECT_THROW(apply_config_text(c, "n1grid = 8\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "n1_grid = 8, x\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "n1_grid = [8, 12\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "n1_grid = 8,,12\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "ns_grid = 5..2\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "rate = fast\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "link = relu\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "seed 5\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "= 5\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "replicas = -1\n"), ConfigError);
  EXPECT_THROW(apply_config_file(c, "/nonexistent/shotlearn.conf"), ConfigError);
}

TEST(Config, Validation) {
  const auto bad = [](Command cmd, const std::string& text) {
    auto c = default_config(cmd, false);
    apply_config_text(c, text);
    EXPECT_THROW(c.validate(cmd), ConfigError) << text;
  };
  bad(Command::sweep_asymmetry, "n1_grid = []");
  bad(Command::sweep_asymmetry, "ns_grid = 0, 1");
  bad(Command::sweep_asymmetry, "train_fraction = 1");
  bad(Command::sweep_asymmetry, "rate = 0");
  bad(Command::sweep_asymmetry, "n2_grid = 1, 2");
  bad(Command::bias_variance, "replicas = 1");
  bad(Command::bias_variance, "d_grid = []");
  bad(Command::tradeoff, "gamma_grid = -1");
  bad(Command::tradeoff, "ntot = 0");
  bad(Command::bounds, "delta = 1");
  bad(Command::learn, "link = identity\nc_grid = []");
  bad(Command::learn, "map = rff\nrff_features = 0");
  for (auto cmd : {Command::target, Command::learn, Command::sweep_asymmetry, Command::single_shot_scaling,
                   Command::bias_variance, Command::tradeoff, Command::bounds})
    for (bool paper : {false, true}) EXPECT_NO_THROW(default_config(cmd, paper).validate(cmd));
}

TEST(Config, Defaults) {
  const auto a = default_config(Command::sweep_asymmetry, true);
  EXPECT_EQ(a.n1_grid, (std::vector<std::size_t>{8, 12, 20, 40, 60, 80, 160, 240}));
  EXPECT_EQ(a.ns_grid, (std::vector<std::size_t>{1, 5, 10, 25, 50, 75, 100, 200}));
  EXPECT_EQ(a.replicas, 5u);
  EXPECT_EQ(a.seed, 1u);
  EXPECT_EQ(a.layers, 10u);
  EXPECT_EQ(a.iters, 50u);
  EXPECT_EQ(a.rate, 1.0);
  EXPECT_EQ(a.test_points, 500u);
  EXPECT_EQ(a.d, 10u);
  const auto t = default_config(Command::tradeoff, false);
  EXPECT_EQ(t.ns_grid.size(), 25u);
  EXPECT_EQ(t.ns_grid.back(), 25u);
  EXPECT_EQ(t.gamma_grid, (std::vector<double>{0, 1, 2, 3, 4, 5}));
  EXPECT_EQ(t.ntot, 600.0);
  EXPECT_EQ(default_config(Command::bias_variance, true).d_grid.size(), 10u);
}

TEST(Config, CompanionValidationSizes) {
  auto c = default_config(Command::sweep_asymmetry, true);
  EXPECT_EQ(c.n2_for(0), 2u);    // 8
  EXPECT_EQ(c.n2_for(3), 10u);   // 40
  EXPECT_EQ(c.n2_for(7), 60u);   // 240
  c.n1_grid = {1};
  EXPECT_EQ(c.n2_for(0), 1u);
  c.n2_grid = {17};
  EXPECT_EQ(c.n2_for(0), 17u);
}

TEST(Config, BoundConstantsDeriveUnlessOverridden) {
  ExperimentConfig c;
  apply_config_text(c, "L = 2\nB = 3\nDelta = 0.5\n");
  auto k = c.bound_constants(4);
  EXPECT_DOUBLE_EQ(k.c1, 3.0);
  EXPECT_EQ(k.gamma, 4.0);
  apply_config_text(c, "c1 = 0.25\nc3 = 0\n");
  k = c.bound_constants(0);
  EXPECT_EQ(k.c1, 0.25);
  EXPECT_EQ(k.c3, 0.0);
  EXPECT_DOUBLE_EQ(k.c2, 6.0 * std::sqrt(std::log(100.0)));
}

TEST(Config, CommandNames) {
  EXPECT_EQ(to_string(Command::single_shot_scaling), "single-shot-scaling");
  EXPECT_EQ(to_string(Command::sweep_asymmetry), "sweep-asymmetry");
}
