#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace advclaim {

// SplitMix64: a 64-bit Weyl counter (increment 0x9e3779b97f4a7c15) passed
// through a fixed avalanche mixer. Integer output is bit-identical on every
// platform; doubles are built from the top 53 bits. Normal variates use the
// Marsaglia polar method (rejection + log/sqrt), never std:: distributions,
// whose algorithms differ between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : seed_(seed), state_(seed) {}

  // Independent stream keyed by (seed, stream). Used to partition noise by
  // sample index so per-sample work is order-independent.
  static Rng derive(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() noexcept;
  // Uniform in [0, 1).
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n); n must be > 0. Unbiased (rejection).
  std::uint64_t uniform_index(std::uint64_t n) noexcept;
  double normal() noexcept;
  double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }

  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace advclaim
