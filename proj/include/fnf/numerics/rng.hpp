#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <utility>

namespace fnf::numerics {

// Seeded random source. The engine is std::mt19937_64, whose output sequence
// is fixed by the C++ standard; uniform and normal variates are derived here
// rather than through <random> distributions so streams are identical across
// standard library implementations.
//
// Streams are split by purpose ("init", "batch", "sample", ...). A split
// depends only on the parent seed and the purpose, never on how many numbers
// the parent already produced.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }

  Rng split(std::string_view purpose) const;
  Rng split(std::uint64_t index) const;

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Standard normal via Box-Muller (one variate per call).
  double normal();
  // Uniform integer on [0, n). n must be positive.
  std::size_t index(std::size_t n);
  bool bernoulli(double p) { return uniform() < p; }

  template <class It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::size_t>(last - first);
    for (std::size_t i = n; i > 1; --i) {
      std::size_t j = index(i);
      using std::swap;
      swap(first[i - 1], first[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace fnf::numerics
