#pragma once

// Command-line front end. Precedence: built-in defaults for the command and
// profile, then --config, then --set (in order), then --seed/--out/--jobs.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "shotlearn/config.hpp"
#include "shotlearn/experiments.hpp"
#include "shotlearn/io.hpp"

namespace shotlearn::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kInfeasible = 3 };

namespace fs = std::filesystem;

inline void write_target_files(const ExperimentConfig& c, const fs::path& out) {
  const io::TargetRecord rec{ReuploadingParams::random(c.layers, c.target_seed), c.target_seed};
  io::write_target(out / "target.txt", rec);
  io::write_series(out / "series.csv", extract_series(rec.params));
}

inline void write_learn_files(const ExperimentConfig& c, const experiments::Target& f, const fs::path& out) {
  const auto res = experiments::learn(c, f);
  io::write_dataset(out / "train.csv", res.data.train);
  io::write_dataset(out / "val.csv", res.data.val);
  io::write_dataset(out / "test_noisy.csv", res.test_noisy);
  io::write_model(out / "model.csv", res.fit.hypothesis);
  io::CsvWriter w(out / "risks.csv", {"explicit_risk", "implicit_risk", "empirical_risk", "noise_floor",
                                      "selected_iteration", "reg"});
  w.row(res.risks.explicit_risk, res.risks.implicit_risk.value_or(0.0), res.risks.empirical_risk.value_or(0.0),
        res.risks.noise_floor.value_or(0.0), res.fit.hypothesis.selected_iteration, res.fit.reg);
}

inline void write_asymmetry(const ExperimentConfig& c, const experiments::Target& f, const fs::path& out) {
  io::CsvWriter w(out / "asymmetry.csv", {"n1", "n2", "ns", "replica", "explicit_risk", "selected_iter"});
  experiments::sweep_asymmetry(c, f, [&](const experiments::AsymmetryRow& r) {
    w.row(r.n1, r.n2, r.ns, r.replica, r.explicit_risk, r.selected_iter);
  });
}

inline void write_single_shot(const ExperimentConfig& c, const experiments::Target& f, const fs::path& out) {
  io::CsvWriter w(out / "single_shot.csv", {"n1", "n2", "ns", "replicas", "mean_risk", "std_risk"});
  io::CsvWriter curve(out / "single_shot_predictor.csv",
                      {"n1", "ns", "x", "target", "mean_prediction", "std_prediction"});
  const auto xs = experiments::test_grid(c.test_points);
  const auto truth = experiments::evaluate(f, xs);
  experiments::single_shot_scaling(c, f, [&](const experiments::SingleShotRow& r) {
    w.row(r.n1, r.n2, r.ns, r.replicas, r.mean_risk, r.std_risk);
    for (std::size_t j = 0; j < xs.size(); ++j)
      curve.row(r.n1, r.ns, xs[j], truth[j], r.mean_prediction[j], r.std_prediction[j]);
  });
}

inline void write_bias_variance(const ExperimentConfig& c, const experiments::Target& f, const fs::path& out) {
  io::CsvWriter w(out / "bias_variance.csv",
                  {"n1", "n2", "d", "ns", "link", "replicas", "bias_sq", "variance", "mean_explicit_risk",
                   "bias_sq_lo", "bias_sq_hi", "variance_lo", "variance_hi"});
  experiments::bias_variance_study(c, f, [&](const experiments::BiasVarianceRow& r) {
    w.row(r.n1, r.n2, r.d, r.ns, to_string(r.link), r.report.ensemble_size, r.report.bias_sq, r.report.variance,
          r.report.mean_explicit_risk, r.bias_ci.lo, r.bias_ci.hi, r.variance_ci.lo, r.variance_ci.hi);
  });
}

inline void write_tradeoff(const ExperimentConfig& c, const experiments::Target& f, const fs::path& out) {
  io::CsvWriter w(out / "tradeoff.csv", {"gamma", "ns", "n1", "n2", "replica", "explicit_risk"});
  const auto res = experiments::budget_tradeoff(c, f, [&](const experiments::TradeoffRow& r) {
    w.row(r.gamma, r.ns, r.n1, r.n2, r.replica, r.explicit_risk);
  });
  io::CsvWriter s(out / "tradeoff_summary.csv",
                  {"gamma", "ns", "n1", "n2", "replicas", "mean_risk", "std_risk", "argmin"});
  for (const auto& r : res.summary)
    s.row(r.gamma, r.ns, r.n1, r.n2, c.replicas, r.mean_risk, r.std_risk, r.argmin ? 1 : 0);
}

inline void write_bounds(const ExperimentConfig& c, const fs::path& out) {
  const auto curves = experiments::bound_curves(c);
  io::CsvWriter a(out / "bounds_asymmetry.csv", {"n1", "ns", "cor1_bound", "thm1_bound"});
  for (const auto& r : curves.asymmetry) a.row(r.n1, r.ns, r.cor1, r.thm1);
  io::CsvWriter b(out / "bounds_budget.csv",
                  {"gamma", "ns", "n1", "bound", "ns_star", "ns_star_clamped", "grid_argmin"});
  for (const auto& r : curves.budget)
    b.row(r.gamma, r.ns, r.n1, r.bound, r.ns_star, clamp_shots(r.ns_star), r.grid_argmin ? 1 : 0);
}

/// Parses arguments and runs one command. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& err = std::cerr) {
  CLI::App app{"Shot-budget learning experiments for a data re-uploading target", "shotlearn"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
  std::vector<std::string> sets;
  bool paper_scale = false;
  app.add_option("--config", config_path, "Config file (key = value)");
  app.add_option("--seed", seed, "Master seed (target seed for 'target')");
  app.add_option("--out", out_dir, "Output directory");
  app.add_flag("--paper-scale", paper_scale, "Use the full-size grids");
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--set", sets, "Override one config key: key=value (repeatable)")->allow_extra_args(false);

  const std::pair<const char*, Command> commands[] = {
      {"target", Command::target},
      {"learn", Command::learn},
      {"sweep-asymmetry", Command::sweep_asymmetry},
      {"single-shot-scaling", Command::single_shot_scaling},
      {"bias-variance", Command::bias_variance},
      {"tradeoff", Command::tradeoff},
      {"bounds", Command::bounds},
  };
  const char* help[] = {"Generate a random target circuit and its Fourier series",
                        "Train one model and report its risks",
                        "Explicit risk over (N1, Ns) pairs",
                        "Single-shot learning at growing N1",
                        "Bias-variance ensembles with and without the link function",
                        "Fixed measurement budget trade-off over (gamma, Ns)",
                        "Closed-form risk bound curves"};
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < std::size(commands); ++i)
    subs.push_back(app.add_subcommand(commands[i].first, help[i])->fallthrough());

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  Command cmd = Command::target;
  for (std::size_t i = 0; i < subs.size(); ++i)
    if (subs[i]->parsed()) cmd = commands[i].second;

  ExperimentConfig cfg;
  try {
    cfg = default_config(cmd, paper_scale);
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
      apply_setting(cfg, std::string(io::trim(std::string_view(s).substr(0, eq))),
                    std::string_view(s).substr(eq + 1));
    }
    if (seed) (cmd == Command::target ? cfg.target_seed : cfg.seed) = *seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (jobs) cfg.jobs = *jobs;
    cfg.validate(cmd);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    const fs::path out = cfg.out_dir;
    fs::create_directories(out);
    if (cmd == Command::target) {
      write_target_files(cfg, out);
    } else if (cmd == Command::bounds) {
      write_bounds(cfg, out);
    } else {
      const auto f = experiments::make_target(cfg);
      switch (cmd) {
        case Command::learn: write_learn_files(cfg, f, out); break;
        case Command::sweep_asymmetry: write_asymmetry(cfg, f, out); break;
        case Command::single_shot_scaling: write_single_shot(cfg, f, out); break;
        case Command::bias_variance: write_bias_variance(cfg, f, out); break;
        case Command::tradeoff: write_tradeoff(cfg, f, out); break;
        default: break;
      }
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InfeasibleBudget& e) {
    err << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}

}  // namespace shotlearn::cli
