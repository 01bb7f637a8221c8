#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "shotlearn/circuit.hpp"

namespace shotlearn {

/// Real trigonometric polynomial c0 + sum_{w=1..d} a[w-1] cos(w x) + b[w-1] sin(w x).
struct FourierSeries {
  double c0 = 0.0;
  std::vector<double> a;
  std::vector<double> b;

  std::size_t degree() const noexcept { return a.size(); }

  void validate() const {
    if (a.size() != b.size())
      throw std::invalid_argument("Fourier series: cosine and sine arrays differ in length");
    if (!std::isfinite(c0)) throw std::invalid_argument("Fourier series: non-finite c0");
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!std::isfinite(a[i]) || !std::isfinite(b[i]))
        throw std::invalid_argument("Fourier series: non-finite coefficient");
  }

  /// a_w for w >= 1, zero beyond the stored degree.
  double cos_coeff(std::size_t w) const { return w >= 1 && w <= a.size() ? a[w - 1] : 0.0; }
  double sin_coeff(std::size_t w) const { return w >= 1 && w <= b.size() ? b[w - 1] : 0.0; }

  friend bool operator==(const FourierSeries&, const FourierSeries&) = default;
};

inline double eval_series(const FourierSeries& series, double x) {
  double v = series.c0;
  for (std::size_t w = 1; w <= series.degree(); ++w) {
    const double arg = static_cast<double>(w) * x;
    v += series.a[w - 1] * std::cos(arg) + series.b[w - 1] * std::sin(arg);
  }
  return v;
}

/// Coefficients below this magnitude are stored as exact zeros.
inline constexpr double kCoefficientZero = 1e-12;

/// Projects equispaced samples f(2 pi k / M), k = 0..M-1, onto frequencies
/// 0..degree. Exact for trigonometric polynomials of degree < M / 2.
inline FourierSeries dft_coefficients(const std::vector<double>& samples, std::size_t degree) {
  const std::size_t m = samples.size();
  if (m < 2 * degree + 1)
    throw std::invalid_argument("DFT grid too coarse for requested degree");
  const auto flush = [](double v) { return std::abs(v) < kCoefficientZero ? 0.0 : v; };

  FourierSeries s;
  s.a.resize(degree);
  s.b.resize(degree);
  double c0 = 0.0;
  for (double v : samples) c0 += v;
  s.c0 = flush(c0 / static_cast<double>(m));
  for (std::size_t w = 1; w <= degree; ++w) {
    double re = 0.0, im = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      // Reduce the phase index mod m so the argument stays in [0, 2pi).
      const double phase = 2.0 * std::numbers::pi * static_cast<double>((w * k) % m) /
                           static_cast<double>(m);
      re += samples[k] * std::cos(phase);
      im += samples[k] * std::sin(phase);
    }
    // Nyquist bin (2w == m) carries the whole cosine amplitude in one term.
    const double scale = (2 * w == m ? 1.0 : 2.0) / static_cast<double>(m);
    s.a[w - 1] = flush(scale * re);
    s.b[w - 1] = flush(scale * im);
  }
  return s;
}

/// Series of the given degree sampled from the circuit on a 4*degree + 4 grid.
inline FourierSeries extract_series(const ReuploadingParams& params, std::size_t degree) {
  const std::size_t m = 4 * degree + 4;
  std::vector<double> samples(m);
  for (std::size_t k = 0; k < m; ++k)
    samples[k] = eval_circuit(params, 2.0 * std::numbers::pi * static_cast<double>(k) /
                                          static_cast<double>(m));
  return dft_coefficients(samples, degree);
}

/// The circuit is a trigonometric polynomial of degree equal to its layer count.
inline FourierSeries extract_series(const ReuploadingParams& params) {
  return extract_series(params, params.layers());
}

/// p(w) = (a_w^2 + b_w^2) / sum_v (a_v^2 + b_v^2) for w = 1..degree; entry
/// w - 1 of the result. The constant term is not part of the distribution.
inline std::vector<double> spectrum_distribution(const FourierSeries& series) {
  series.validate();
  std::vector<double> p(series.degree());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = series.a[i] * series.a[i] + series.b[i] * series.b[i];
    total += p[i];
  }
  if (!(total > 0.0)) throw std::domain_error("degenerate spectrum: no non-constant coefficients");
  for (double& v : p) v /= total;
  return p;
}

}  // namespace shotlearn
