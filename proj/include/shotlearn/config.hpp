#pragma once

// Experiment configuration: a flat "key = value" file. Values are scalars,
// comma-separated lists ("1, 2, 3" or "[1, 2, 3]") or integer ranges
// ("1..25"). '#' starts a comment. Unknown keys are rejected.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "shotlearn/analysis.hpp"
#include "shotlearn/features.hpp"
#include "shotlearn/io.hpp"
#include "shotlearn/learner.hpp"

namespace shotlearn {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command { target, learn, sweep_asymmetry, single_shot_scaling, bias_variance, tradeoff, bounds };

inline std::string_view to_string(Command c) {
  switch (c) {
    case Command::target: return "target";
    case Command::learn: return "learn";
    case Command::sweep_asymmetry: return "sweep-asymmetry";
    case Command::single_shot_scaling: return "single-shot-scaling";
    case Command::bias_variance: return "bias-variance";
    case Command::tradeoff: return "tradeoff";
    case Command::bounds: return "bounds";
  }
  return "?";
}

struct ExperimentConfig {
  // target
  std::string target_file;  // empty: generate from layers / target_seed
  std::size_t layers = 10;
  std::uint64_t target_seed = 7;

  std::uint64_t seed = 1;  // master seed for datasets and replicas
  std::vector<std::size_t> n1_grid;
  std::vector<std::size_t> n2_grid;  // empty: companion sizes from train_fraction
  std::vector<std::size_t> ns_grid;
  std::vector<std::size_t> d_grid;   // bias-variance hypothesis degrees
  std::size_t replicas = 5;
  std::size_t d = 10;
  LinkKind link = LinkKind::clip01;
  MapKind map = MapKind::truncated;
  std::size_t rff_features = 10;  // frequencies drawn when map = rff
  double rate = 1.0;
  std::size_t iters = 50;
  std::size_t test_points = 500;
  std::vector<double> gamma_grid;
  double ntot = 600;
  double train_fraction = 0.8;
  std::vector<double> c_grid = default_c_grid();
  std::string out_dir = "out";
  unsigned jobs = 1;

  // bound constants; c1..c3 derive from L, B, Delta, sigma_bar, delta unless set
  BoundConstants bound;
  std::optional<double> c1, c2, c3;

  BoundConstants bound_constants(double gamma) const {
    BoundConstants c = bound.with_derived_c();
    if (c1) c.c1 = *c1;
    if (c2) c.c2 = *c2;
    if (c3) c.c3 = *c3;
    c.gamma = gamma;
    return c;
  }

  /// Validation-set size paired with a training-set size.
  std::size_t n2_for(std::size_t n1_index) const {
    if (!n2_grid.empty()) return n2_grid.at(n1_index);
    const double n1 = static_cast<double>(n1_grid.at(n1_index));
    const double n2 = std::round(n1 * (1.0 - train_fraction) / train_fraction);
    return n2 < 1.0 ? 1 : static_cast<std::size_t>(n2);
  }

  void validate(Command cmd) const {
    const auto need = [](bool ok, const char* msg) {
      if (!ok) throw ConfigError(msg);
    };
    need(layers >= 1, "layers must be >= 1");
    need(replicas >= 1, "replicas must be >= 1");
    need(iters >= 1, "iters must be >= 1");
    need(test_points >= 1, "test_points must be >= 1");
    need(rate > 0.0 && std::isfinite(rate), "rate must be positive");
    need(train_fraction > 0.0 && train_fraction < 1.0, "train_fraction must lie in (0, 1)");
    need(d >= 1, "d must be >= 1");
    need(jobs >= 1, "jobs must be >= 1");
    need(map != MapKind::rff || rff_features >= 1, "rff_features must be >= 1");
    for (double c : c_grid) need(c >= 0.0 && std::isfinite(c), "c_grid entries must be >= 0");
    for (double g : gamma_grid) need(g >= 0.0 && std::isfinite(g), "gamma_grid entries must be >= 0");
    for (auto n : ns_grid) need(n >= 1, "ns_grid entries must be >= 1");
    for (auto n : n1_grid) need(n >= 1, "n1_grid entries must be >= 1");
    for (auto n : d_grid) need(n >= 1, "d_grid entries must be >= 1");
    try {
      bound.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (!n2_grid.empty()) need(n2_grid.size() == n1_grid.size(), "n2_grid must match n1_grid in length");

    switch (cmd) {
      case Command::target: break;
      case Command::learn:
        need(!n1_grid.empty() && !ns_grid.empty(), "learn needs n1_grid and ns_grid");
        need(link == LinkKind::clip01 || !c_grid.empty(), "identity link needs c_grid");
        break;
      case Command::sweep_asymmetry:
      case Command::single_shot_scaling:
        need(!n1_grid.empty() && !ns_grid.empty(), "n1_grid and ns_grid must be nonempty");
        break;
      case Command::bias_variance:
        need(!n1_grid.empty() && !ns_grid.empty() && !d_grid.empty(), "n1_grid, ns_grid and d_grid must be nonempty");
        need(replicas >= 2, "bias-variance needs replicas >= 2");
        need(!c_grid.empty(), "bias-variance needs c_grid");
        break;
      case Command::tradeoff:
        need(!gamma_grid.empty() && !ns_grid.empty(), "gamma_grid and ns_grid must be nonempty");
        need(ntot >= 1.0, "ntot must be >= 1");
        break;
      case Command::bounds:
        need(!n1_grid.empty() && !ns_grid.empty() && !gamma_grid.empty(), "bounds needs n1, ns and gamma grids");
        need(ntot >= 1.0, "ntot must be >= 1");
        break;
    }
  }
};

namespace detail {

inline std::vector<std::string> list_items(std::string_view v) {
  v = io::trim(v);
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') throw ConfigError("unterminated list: " + std::string(v));
    v = io::trim(v.substr(1, v.size() - 2));
  }
  std::vector<std::string> out;
  if (v.empty()) return out;
  for (auto item : io::split(v, ',')) {
    if (item.empty()) throw ConfigError("empty list item in: " + std::string(v));
    out.emplace_back(item);
  }
  return out;
}

inline std::string unquote(std::string_view v) {
  v = io::trim(v);
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
  return std::string(v);
}

template <class F>
auto config_value(const std::string& key, F&& parse) {
  try {
    return parse();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("bad value for '" + key + "': " + e.what());
  }
}

inline double to_real(std::string_view s) { return io::parse_double(s); }
inline std::size_t to_count(std::string_view s) { return static_cast<std::size_t>(io::parse_u64(s)); }

inline std::vector<std::size_t> to_counts(std::string_view v) {
  std::vector<std::size_t> out;
  for (const auto& item : list_items(v)) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(to_count(item));
      continue;
    }
    const auto lo = to_count(std::string_view(item).substr(0, dots));
    const auto hi = to_count(std::string_view(item).substr(dots + 2));
    if (hi < lo) throw ConfigError("empty range: " + item);
    for (auto k = lo; k <= hi; ++k) out.push_back(k);
  }
  return out;
}

inline std::vector<double> to_reals(std::string_view v) {
  std::vector<double> out;
  for (const auto& item : list_items(v)) {
    if (item.find("..") != std::string::npos) {
      for (auto k : to_counts(item)) out.push_back(static_cast<double>(k));
    } else {
      out.push_back(to_real(item));
    }
  }
  return out;
}

}  // namespace detail

/// Applies one setting. Throws ConfigError for unknown keys or bad values.
inline void apply_setting(ExperimentConfig& c, const std::string& key, std::string_view raw) {
  using namespace detail;
  config_value(key, [&] {
    const std::string v = unquote(raw);
    if (key == "target_file") c.target_file = v;
    else if (key == "layers") c.layers = to_count(v);
    else if (key == "target_seed") c.target_seed = io::parse_u64(v);
    else if (key == "seed") c.seed = io::parse_u64(v);
    else if (key == "n1_grid") c.n1_grid = to_counts(v);
    else if (key == "n2_grid") c.n2_grid = to_counts(v);
    else if (key == "ns_grid") c.ns_grid = to_counts(v);
    else if (key == "d_grid") c.d_grid = to_counts(v);
    else if (key == "replicas") c.replicas = to_count(v);
    else if (key == "d") c.d = to_count(v);
    else if (key == "link") c.link = parse_link_kind(v);
    else if (key == "map") c.map = parse_map_kind(v);
    else if (key == "rff_features") c.rff_features = to_count(v);
    else if (key == "rate") c.rate = to_real(v);
    else if (key == "iters") c.iters = to_count(v);
    else if (key == "test_points") c.test_points = to_count(v);
    else if (key == "gamma_grid") c.gamma_grid = to_reals(v);
    else if (key == "ntot") c.ntot = to_real(v);
    else if (key == "train_fraction") c.train_fraction = to_real(v);
    else if (key == "c_grid") c.c_grid = to_reals(v);
    else if (key == "out_dir") c.out_dir = v;
    else if (key == "jobs") c.jobs = static_cast<unsigned>(to_count(v));
    else if (key == "L") c.bound.L = to_real(v);
    else if (key == "B") c.bound.B = to_real(v);
    else if (key == "Delta") c.bound.Delta = to_real(v);
    else if (key == "sigma_bar") c.bound.sigma_bar = to_real(v);
    else if (key == "delta") c.bound.delta = to_real(v);
    else if (key == "eps1") c.bound.eps1 = to_real(v);
    else if (key == "M") c.bound.M = to_real(v);
    else if (key == "D") c.bound.D = to_real(v);
    else if (key == "c1") c.c1 = to_real(v);
    else if (key == "c2") c.c2 = to_real(v);
    else if (key == "c3") c.c3 = to_real(v);
    else throw ConfigError("unknown config key '" + key + "'");
    return 0;
  });
}

/// Parses "key = value" lines onto `c`.
inline void apply_config_text(ExperimentConfig& c, std::string_view text) {
  std::size_t lineno = 0;
  for (auto line : io::split(text, '\n')) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = io::trim(line.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key(io::trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": missing key");
    apply_setting(c, key, line.substr(eq + 1));
  }
}

inline void apply_config_file(ExperimentConfig& c, const std::filesystem::path& p) {
  std::string text;
  try {
    text = io::read_file(p);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  apply_config_text(c, text);
}

/// Built-in grids. The smoke profile keeps every statistical comparison the
/// acceptance checks make while cutting the rest; --paper-scale restores the
/// full-size grids.
inline ExperimentConfig default_config(Command cmd, bool paper_scale) {
  ExperimentConfig c;
  const std::vector<std::size_t> paper_n1{8, 12, 20, 40, 60, 80, 160, 240};
  const std::vector<std::size_t> paper_ns{1, 5, 10, 25, 50, 75, 100, 200};
  switch (cmd) {
    case Command::target: break;
    case Command::learn:
      c.n1_grid = {40};
      c.ns_grid = {1};
      break;
    case Command::sweep_asymmetry:
      c.n1_grid = paper_scale ? paper_n1 : std::vector<std::size_t>{8, 40, 240};
      c.ns_grid = paper_scale ? paper_ns : std::vector<std::size_t>{1, 10, 100, 200};
      c.replicas = 5;
      break;
    case Command::single_shot_scaling:
      c.n1_grid = {40, 800, 24000};
      c.n2_grid = {10, 200, 600};
      c.ns_grid = {1};
      c.replicas = 5;
      break;
    case Command::bias_variance:
      c.n1_grid = {40};
      c.n2_grid = {10};
      c.ns_grid = {1, 10, 100};
      c.d_grid = paper_scale ? std::vector<std::size_t>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}
                             : std::vector<std::size_t>{1, 5, 10};
      c.replicas = 20;
      break;
    case Command::tradeoff:
    case Command::bounds:
      c.gamma_grid = {0, 1, 2, 3, 4, 5};
      c.ns_grid = detail::to_counts("1..25");
      c.replicas = paper_scale ? 60 : 10;
      if (cmd == Command::bounds) c.n1_grid = paper_n1;
      break;
  }
  return c;
}

}  // namespace shotlearn
