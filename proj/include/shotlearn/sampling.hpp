#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "shotlearn/circuit.hpp"
#include "shotlearn/rng.hpp"

namespace shotlearn {

/// Spectral distribution of an observable in a fixed state: eigenvalue k is
/// measured with probability probabilities[k].
class EigenDistribution {
 public:
  EigenDistribution(std::vector<double> eigenvalues, std::vector<double> probabilities)
      : eigenvalues_(std::move(eigenvalues)), probabilities_(std::move(probabilities)) {
    if (eigenvalues_.empty() || eigenvalues_.size() != probabilities_.size())
      throw std::invalid_argument("eigen distribution: need K >= 1 matching eigenvalues/probabilities");
    double total = 0.0;
    cumulative_.reserve(probabilities_.size());
    for (std::size_t k = 0; k < probabilities_.size(); ++k) {
      const double p = probabilities_[k];
      if (!std::isfinite(p) || p < 0.0)
        throw std::invalid_argument("eigen distribution: negative or non-finite probability");
      if (!std::isfinite(eigenvalues_[k]))
        throw std::invalid_argument("eigen distribution: non-finite eigenvalue");
      total += p;
      cumulative_.push_back(total);
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw std::invalid_argument("eigen distribution: probabilities must sum to 1");
    cumulative_.back() = 1.0;
  }

  /// Projector |0><0| measured on a state with <0|rho|0> = p.
  static EigenDistribution projector(double p) { return EigenDistribution({0.0, 1.0}, {1.0 - p, p}); }

  const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }
  const std::vector<double>& probabilities() const noexcept { return probabilities_; }

  double mean() const {
    double m = 0.0;
    for (std::size_t k = 0; k < eigenvalues_.size(); ++k) m += eigenvalues_[k] * probabilities_[k];
    return m;
  }

  /// Inverse CDF: the first k with u < cumulative[k]; ties go to the lower index.
  std::size_t draw_index(Rng& rng) const {
    const double u = rng.uniform();
    for (std::size_t k = 0; k < cumulative_.size(); ++k)
      if (u < cumulative_[k]) return k;
    return cumulative_.size() - 1;
  }

  double draw(Rng& rng) const { return eigenvalues_[draw_index(rng)]; }

 private:
  std::vector<double> eigenvalues_;
  std::vector<double> probabilities_;
  std::vector<double> cumulative_;
};

namespace detail {
inline void require_probability(double p) {
  if (!(p >= -1e-12 && p <= 1.0 + 1e-12))
    throw std::invalid_argument("probability outside [0, 1]: " + std::to_string(p));
}
inline void require_shots(std::size_t shots) {
  if (shots == 0) throw std::invalid_argument("shots must be >= 1");
}
}  // namespace detail

/// Mean of `shots` Bernoulli(p) outcomes. Each outcome is 1 iff u >= 1 - p,
/// the same rule EigenDistribution::projector(p).draw uses, so both paths
/// produce identical labels from identical streams.
inline double sample_mean_label(double p, std::size_t shots, Rng& rng) {
  detail::require_probability(p);
  detail::require_shots(shots);
  const double threshold = 1.0 - std::clamp(p, 0.0, 1.0);
  std::size_t ones = 0;
  for (std::size_t i = 0; i < shots; ++i)
    if (!(rng.uniform() < threshold)) ++ones;
  return static_cast<double>(ones) / static_cast<double>(shots);
}

/// sum_k lambda_k * (count_k / shots): exact when one eigenvalue takes all
/// shots, and equal to sample_mean_label for the projector.
inline double sample_eigen_label(const EigenDistribution& dist, std::size_t shots, Rng& rng) {
  detail::require_shots(shots);
  std::vector<std::size_t> counts(dist.eigenvalues().size(), 0);
  for (std::size_t i = 0; i < shots; ++i) ++counts[dist.draw_index(rng)];
  double mean = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k)
    if (counts[k] != 0)
      mean += dist.eigenvalues()[k] * (static_cast<double>(counts[k]) / static_cast<double>(shots));
  return mean;
}

/// Inputs with empirical-mean labels over `shots` measurements each.
struct LabeledDataset {
  std::vector<double> xs;
  std::vector<double> ys;
  std::size_t shots = 1;
  std::uint64_t seed = 0;
  std::string target_ref;

  std::size_t size() const noexcept { return xs.size(); }
  bool empty() const noexcept { return xs.empty(); }

  void validate() const {
    if (xs.size() != ys.size()) throw std::invalid_argument("dataset: xs and ys differ in length");
    detail::require_shots(shots);
  }
};

/// Takes one label seed from `rng`, draws all n inputs uniformly on [0, 2pi),
/// then labels input i with `shots` projector measurements from the stream
/// derive_seed(label seed, {i}). Datasets built from equal stream states are
/// therefore nested: a smaller n keeps a prefix of the inputs, and a smaller
/// shot count keeps a prefix of every input's measurement record.
inline LabeledDataset build_dataset(const ReuploadingParams& params, std::size_t n, std::size_t shots,
                                    Rng& rng) {
  detail::require_shots(shots);
  LabeledDataset data;
  data.shots = shots;
  data.seed = rng.seed();
  data.xs.resize(n);
  data.ys.resize(n);
  const std::uint64_t label_seed = rng.next_u64();
  for (double& x : data.xs) x = rng.uniform_angle();
  for (std::size_t i = 0; i < n; ++i) {
    Rng shot_stream(derive_seed(label_seed, {i}));
    data.ys[i] = sample_mean_label(eval_circuit(params, data.xs[i]), shots, shot_stream);
  }
  return data;
}

inline LabeledDataset build_dataset(const ReuploadingParams& params, std::size_t n, std::size_t shots,
                                    std::uint64_t seed) {
  Rng rng(seed);
  return build_dataset(params, n, shots, rng);
}

}  // namespace shotlearn
