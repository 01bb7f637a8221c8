#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "shotlearn/fourier.hpp"
#include "shotlearn/rng.hpp"

namespace shotlearn {

enum class MapKind { full, truncated, rff };

inline std::string_view to_string(MapKind k) {
  switch (k) {
    case MapKind::full: return "full";
    case MapKind::truncated: return "truncated";
    case MapKind::rff: return "rff";
  }
  return "?";
}

inline MapKind parse_map_kind(std::string_view s) {
  if (s == "full") return MapKind::full;
  if (s == "truncated") return MapKind::truncated;
  if (s == "rff") return MapKind::rff;
  throw std::invalid_argument("unknown feature map kind: " + std::string(s));
}

/// Normalized trigonometric feature map
///
///   phi(x) = (1, cos w1 x, sin w1 x, ..., cos wk x, sin wk x) / sqrt(blocks)
///
/// where blocks = k (+1 with the constant). ||phi(x)||_2 = 1 for every x.
/// RFF maps may repeat a frequency; repeats are separate blocks.
class FeatureMap {
 public:
  FeatureMap(MapKind kind, std::vector<std::size_t> frequencies, bool includes_constant)
      : kind_(kind), frequencies_(std::move(frequencies)), constant_(includes_constant) {
    if (frequencies_.empty() && !constant_) throw std::invalid_argument("feature map has no features");
    for (std::size_t w : frequencies_)
      if (w == 0) throw std::invalid_argument("feature map frequencies must be positive");
    norm_ = 1.0 / std::sqrt(static_cast<double>(block_count()));
  }

  /// Frequencies 1..degree plus the constant.
  static FeatureMap truncated(std::size_t degree) {
    return FeatureMap(MapKind::truncated, ascending(degree), true);
  }

  /// The whole spectrum of a series: frequencies 1..series.degree() plus the constant.
  static FeatureMap full(const FourierSeries& series) {
    return FeatureMap(MapKind::full, ascending(series.degree()), true);
  }

  static FeatureMap rff(std::vector<std::size_t> frequencies, bool includes_constant = true) {
    return FeatureMap(MapKind::rff, std::move(frequencies), includes_constant);
  }

  MapKind kind() const noexcept { return kind_; }
  const std::vector<std::size_t>& frequencies() const noexcept { return frequencies_; }
  bool includes_constant() const noexcept { return constant_; }
  std::size_t block_count() const noexcept { return frequencies_.size() + (constant_ ? 1 : 0); }
  std::size_t dimension() const noexcept { return 2 * frequencies_.size() + (constant_ ? 1 : 0); }

  void phi_into(double x, std::span<double> out) const {
    if (out.size() != dimension()) throw std::invalid_argument("feature buffer has wrong size");
    std::size_t j = 0;
    if (constant_) out[j++] = norm_;
    for (std::size_t w : frequencies_) {
      const double arg = static_cast<double>(w) * x;
      out[j++] = norm_ * std::cos(arg);
      out[j++] = norm_ * std::sin(arg);
    }
  }

  std::vector<double> phi(double x) const {
    std::vector<double> v(dimension());
    phi_into(x, v);
    return v;
  }

  /// <phi(x), phi(x2)> = (const + sum_w cos(w (x - x2))) / blocks
  double kernel(double x, double x2) const {
    const double d = x - x2;
    double s = constant_ ? 1.0 : 0.0;
    for (std::size_t w : frequencies_) s += std::cos(static_cast<double>(w) * d);
    return s * norm_ * norm_;
  }

  friend bool operator==(const FeatureMap& l, const FeatureMap& r) {
    return l.kind_ == r.kind_ && l.frequencies_ == r.frequencies_ && l.constant_ == r.constant_;
  }

 private:
  static std::vector<std::size_t> ascending(std::size_t degree) {
    std::vector<std::size_t> f(degree);
    for (std::size_t i = 0; i < degree; ++i) f[i] = i + 1;
    return f;
  }

  MapKind kind_;
  std::vector<std::size_t> frequencies_;
  bool constant_;
  double norm_ = 1.0;
};

/// Weight vector w with <w, phi(x)> = eval_series(series restricted to the
/// map's frequencies, x): coefficients scaled by sqrt(blocks). Frequencies the
/// series does not contain get zero weight.
inline std::vector<double> weights_from_series(const FeatureMap& map, const FourierSeries& series) {
  const double scale = std::sqrt(static_cast<double>(map.block_count()));
  std::vector<double> w;
  w.reserve(map.dimension());
  if (map.includes_constant()) w.push_back(scale * series.c0);
  for (std::size_t f : map.frequencies()) {
    w.push_back(scale * series.cos_coeff(f));
    w.push_back(scale * series.sin_coeff(f));
  }
  return w;
}

/// Default norm budget B = sqrt(blocks) * (|c0| + sum_w |a_w| + |b_w|).
inline double default_weight_budget(const FeatureMap& map, const FourierSeries& series) {
  double l1 = std::abs(series.c0);
  for (std::size_t i = 0; i < series.degree(); ++i) l1 += std::abs(series.a[i]) + std::abs(series.b[i]);
  return std::sqrt(static_cast<double>(map.block_count())) * l1;
}

/// Draws `count` frequencies i.i.d. (with replacement) from the series'
/// spectrum distribution. The returned map carries the constant feature.
inline FeatureMap sample_rff_map(const FourierSeries& series, std::size_t count, Rng& rng) {
  if (count == 0) throw std::invalid_argument("RFF map needs at least one frequency");
  const std::vector<double> p = spectrum_distribution(series);
  std::vector<double> cdf(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) cdf[i] = (acc += p[i]);
  cdf.back() = 1.0;

  std::vector<std::size_t> freqs(count);
  for (auto& f : freqs) {
    const double u = rng.uniform();
    std::size_t k = 0;
    while (k + 1 < cdf.size() && !(u < cdf[k])) ++k;
    // Only the forced cdf.back() = 1 can land on a zero-probability tail.
    while (p[k] == 0.0 && k > 0) --k;
    f = k + 1;
  }
  return FeatureMap::rff(std::move(freqs), true);
}

}  // namespace shotlearn
