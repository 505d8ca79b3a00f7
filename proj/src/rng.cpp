#include "dequant/rng.hpp"

#include <cmath>
#include <numbers>

namespace dequant {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
}

Rng::Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // 1 - u lies in (0, 1], so the log is finite.
  const double radius = std::sqrt(-2.0 * std::log(1.0 - uniform()));
  const double angle = 2.0 * std::numbers::pi * uniform();
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Reject the top partial block of the 64-bit range.
  const std::uint64_t limit = -n % n;
  while (true) {
    const std::uint64_t x = next();
    if (x >= limit) return x % n;
  }
}

}  // namespace dequant
