#pragma once

// Exact simulation of the single-qubit data re-uploading circuit
//
//   f(x) = |<0| Rot(theta[L]) R_X(x) Rot(theta[L-1]) ... R_X(x) Rot(theta[0]) |0>|^2
//
// with Rot(t1, t2, t3) = R_Z(t3) R_Y(t2) R_Z(t1) and R_P(a) = exp(-i a P / 2).
// Layer 0 acts first; the last angle triple is the closing rotation.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "shotlearn/rng.hpp"

namespace shotlearn {

using Complex = std::complex<double>;
using Qubit = std::array<Complex, 2>;

/// 2x2 complex matrix, row-major.
struct UnitaryMatrix2 {
  std::array<Complex, 4> m{Complex{1.0}, Complex{0.0}, Complex{0.0}, Complex{1.0}};

  Complex operator()(std::size_t row, std::size_t col) const { return m[2 * row + col]; }
  Complex& operator()(std::size_t row, std::size_t col) { return m[2 * row + col]; }

  static UnitaryMatrix2 identity() { return {}; }

  friend UnitaryMatrix2 operator*(const UnitaryMatrix2& a, const UnitaryMatrix2& b) {
    UnitaryMatrix2 r;
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) r(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j);
    return r;
  }

  Qubit apply(const Qubit& s) const {
    return {m[0] * s[0] + m[1] * s[1], m[2] * s[0] + m[3] * s[1]};
  }

  UnitaryMatrix2 adjoint() const {
    UnitaryMatrix2 r;
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) r(i, j) = std::conj((*this)(j, i));
    return r;
  }

  /// max |(U^dagger U - I)_ij|
  double unitarity_defect() const {
    const UnitaryMatrix2 p = adjoint() * (*this);
    double worst = 0.0;
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j)
        worst = std::max(worst, std::abs(p(i, j) - Complex{i == j ? 1.0 : 0.0}));
    return worst;
  }
};

namespace detail {
inline void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be finite");
}
}  // namespace detail

inline UnitaryMatrix2 rx(double a) {
  detail::require_finite(a, "rotation angle");
  const double c = std::cos(a / 2), s = std::sin(a / 2);
  return {{Complex{c}, Complex{0, -s}, Complex{0, -s}, Complex{c}}};
}

inline UnitaryMatrix2 ry(double a) {
  detail::require_finite(a, "rotation angle");
  const double c = std::cos(a / 2), s = std::sin(a / 2);
  return {{Complex{c}, Complex{-s}, Complex{s}, Complex{c}}};
}

inline UnitaryMatrix2 rz(double a) {
  detail::require_finite(a, "rotation angle");
  return {{std::polar(1.0, -a / 2), Complex{0.0}, Complex{0.0}, std::polar(1.0, a / 2)}};
}

/// R_Z(theta3) R_Y(theta2) R_Z(theta1)
inline UnitaryMatrix2 rot(double theta1, double theta2, double theta3) {
  return rz(theta3) * ry(theta2) * rz(theta1);
}

using AngleTriple = std::array<double, 3>;

/// Angles of a re-uploading circuit with `layers` encoding gates: layers + 1
/// triples, the last one being the closing rotation.
class ReuploadingParams {
 public:
  explicit ReuploadingParams(std::vector<AngleTriple> angles) : angles_(std::move(angles)) {
    if (angles_.size() < 2)
      throw std::invalid_argument("re-uploading circuit needs at least one layer");
    for (const auto& t : angles_)
      for (double v : t) detail::require_finite(v, "circuit angle");
  }

  /// All-zero angles: f(x) = cos^2(layers * x / 2).
  static ReuploadingParams zeros(std::size_t layers) {
    if (layers == 0) throw std::invalid_argument("layers must be >= 1");
    return ReuploadingParams(std::vector<AngleTriple>(layers + 1, AngleTriple{0, 0, 0}));
  }

  /// i.i.d. uniform angles on [0, 2pi), row by row.
  static ReuploadingParams random(std::size_t layers, std::uint64_t seed) {
    if (layers == 0) throw std::invalid_argument("layers must be >= 1");
    Rng rng(seed);
    std::vector<AngleTriple> angles(layers + 1);
    for (auto& t : angles)
      for (double& v : t) v = rng.uniform_angle();
    return ReuploadingParams(std::move(angles));
  }

  std::size_t layers() const noexcept { return angles_.size() - 1; }
  const std::vector<AngleTriple>& angles() const noexcept { return angles_; }

  friend bool operator==(const ReuploadingParams&, const ReuploadingParams&) = default;

 private:
  std::vector<AngleTriple> angles_;
};

/// Runs the circuit on |0> and calls `observe` with the state after every gate.
inline Qubit evolve_state(const ReuploadingParams& params, double x,
                          const std::function<void(const Qubit&)>& observe = {}) {
  detail::require_finite(x, "circuit input");
  const UnitaryMatrix2 encode = rx(x);
  Qubit state{Complex{1.0}, Complex{0.0}};
  const auto& angles = params.angles();
  for (std::size_t l = 0; l < params.layers(); ++l) {
    state = rot(angles[l][0], angles[l][1], angles[l][2]).apply(state);
    if (observe) observe(state);
    state = encode.apply(state);
    if (observe) observe(state);
  }
  const auto& last = angles.back();
  state = rot(last[0], last[1], last[2]).apply(state);
  if (observe) observe(state);
  return state;
}

/// |<0|U(x)|0>|^2 clamped to [0, 1]. Values outside [-1e-12, 1 + 1e-12]
/// indicate a simulation fault and throw.
inline double eval_circuit(const ReuploadingParams& params, double x) {
  const Qubit s = evolve_state(params, x);
  const double p = std::norm(s[0]);
  if (p < -1e-12 || p > 1.0 + 1e-12) throw std::logic_error("circuit probability out of range");
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace shotlearn
