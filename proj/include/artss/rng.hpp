#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace artss {

// Seeded generator whose output is identical across standard libraries.
// std::mt19937_64's sequence is fixed by the standard; the distributions are
// not, so the helpers below derive reals and indices from raw 64-bit draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform01();
  // Uniform in [lo, hi]; never leaves the closed interval.
  double uniform(double lo, double hi);
  // Uniform integer in [0, n); n > 0.
  std::uint64_t index(std::uint64_t n);
  bool bernoulli(double p) { return uniform01() < p; }
  // Box-Muller standard normal.
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(index(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

// Stable per-item seed, e.g. one per (image stem, augmentation index).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key,
                          std::uint64_t index = 0);

}  // namespace artss
