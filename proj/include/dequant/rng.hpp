#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace dequant {

/// SplitMix64 finalizer applied to master ^ golden * (stream + 1). Used to
/// hand every trial and every component its own stream.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// 64-bit Mersenne Twister (std::mt19937_64) seeded through SplitMix64. The
/// draws below are written out rather than taken from <random>
/// distributions, whose algorithms vary between standard libraries, so a
/// seed yields the same numbers on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal by the Box-Muller transform.
  double normal();
  /// Uniform on {0, ..., n - 1} without modulo bias. n must be positive.
  std::uint64_t below(std::uint64_t n);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[static_cast<std::size_t>(below(i))]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dequant
