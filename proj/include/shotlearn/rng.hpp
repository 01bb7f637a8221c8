#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <stdexcept>

namespace shotlearn {

/// SplitMix64 finalizer. Used only to derive seeds, never as a sample stream.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stream-splitting rule: the seed of a sub-stream is a hash chain over the
/// master seed followed by each index of the path, in order.
///
///   h0 = splitmix64(master)
///   hk = splitmix64(h(k-1) ^ (index_k * 0xd1b54a32d192ed03 + k))
///
/// The index is mixed in unhashed so that no (master, index) pair can cancel
/// against another the way two outputs of the same hash would.
///
/// Streams therefore depend on the cell coordinates only, never on the order
/// in which cells are executed.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = splitmix64(master);
  std::uint64_t k = 1;
  for (std::uint64_t index : path) {
    h = splitmix64(h ^ (index * 0xd1b54a32d192ed03ULL + k));
    ++k;
  }
  return h;
}

/// Seeded sample stream. The engine is std::mt19937_64 (fully specified by
/// the standard); all conversions to doubles are done here instead of via
/// std::*_distribution so results are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on [0, 2*pi).
  double uniform_angle() {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double v = two_pi * uniform();
    return v < two_pi ? v : std::nextafter(two_pi, 0.0);
  }

  /// Uniform integer in [0, n) by rejection (unbiased).
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: empty range");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  Rng substream(std::initializer_list<std::uint64_t> path) const {
    return Rng(derive_seed(seed_, path));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace shotlearn
