#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "shotlearn/rng.hpp"

namespace shotlearn::stats {

inline double mean(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("mean of empty sample");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Sample standard deviation (n - 1 denominator); 0 for a single value.
inline double stddev(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

/// Linear-interpolated quantile of a sorted sample.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

struct Interval {
  double estimate = 0.0;
  double lo = 0.0;
  double hi = 0.0;

  bool below(const Interval& other) const { return hi < other.lo; }
};

/// Percentile bootstrap. `statistic` receives resampled indices into a
/// sample of size n and returns the statistic on that resample.
inline Interval bootstrap(std::size_t n, const std::function<double(std::span<const std::size_t>)>& statistic,
                          Rng& rng, std::size_t resamples = 1000, double level = 0.95) {
  if (n == 0) throw std::invalid_argument("bootstrap of empty sample");
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Interval out;
  out.estimate = statistic(idx);
  std::vector<double> draws(resamples);
  for (double& d : draws) {
    for (auto& i : idx) i = rng.uniform_index(n);
    d = statistic(idx);
  }
  std::sort(draws.begin(), draws.end());
  const double tail = (1.0 - level) / 2.0;
  out.lo = quantile_sorted(draws, tail);
  out.hi = quantile_sorted(draws, 1.0 - tail);
  return out;
}

inline Interval bootstrap_mean(std::span<const double> sample, Rng& rng, std::size_t resamples = 1000,
                               double level = 0.95) {
  return bootstrap(
      sample.size(),
      [&](std::span<const std::size_t> idx) {
        double s = 0.0;
        for (std::size_t i : idx) s += sample[i];
        return s / static_cast<double>(idx.size());
      },
      rng, resamples, level);
}

}  // namespace shotlearn::stats
