#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "hte/errors.hpp"

namespace hte {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace detail

// Stream ids tag independent consumers of randomness. The high bits carry the
// consumer kind, the low 48 bits an index, so every (seed, stream) pair maps
// to a distinct generator state regardless of scheduling.
constexpr std::uint64_t make_stream(std::uint64_t kind, std::uint64_t index = 0) {
  return (kind << 48) | (index & 0xFFFFFFFFFFFFull);
}

namespace streams {
inline constexpr std::uint64_t kSplitHalf = 1;
inline constexpr std::uint64_t kSubsample = 2;
inline constexpr std::uint64_t kBag = 3;
inline constexpr std::uint64_t kTree = 4;
inline constexpr std::uint64_t kPermutation = 5;
inline constexpr std::uint64_t kReferenceFit = 6;
inline constexpr std::uint64_t kPermutedFit = 7;
inline constexpr std::uint64_t kInferenceSplit = 8;
inline constexpr std::uint64_t kSimulation = 9;
inline constexpr std::uint64_t kBenchmark = 10;
}  // namespace streams

// Deterministic RNG keyed by (seed, stream id). Identical keys replay
// identical sequences; distinct stream ids give decorrelated streams. All
// draw primitives are hand-rolled on top of the raw engine output so the
// sequences do not depend on the standard library's unspecified distribution
// implementations.
class SeededRng {
 public:
  SeededRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
    std::uint64_t s = seed;
    detail::splitmix64(s);
    s ^= stream * 0xD2B74407B1CE6E93ull;
    engine_.seed(detail::splitmix64(s));
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on {0, ..., bound-1}; unbiased via rejection.
  std::uint64_t next_below(std::uint64_t bound) {
    if (bound == 0) throw validation_error("next_below: bound must be positive");
    const std::uint64_t reject_below = (0 - bound) % bound;
    std::uint64_t r = next_u64();
    while (r < reject_below) r = next_u64();
    return r % bound;
  }

  // Standard normal via Box-Muller. Two uniforms per draw, no cached spare,
  // so the consumed sequence length is input-independent.
  double next_normal() {
    const double u1 = 1.0 - next_double();  // (0, 1]
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  // k distinct values from {0, ..., n-1} in draw order (partial Fisher-Yates).
  std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n, std::uint32_t k) {
    if (k > n) throw validation_error("sample_without_replacement: k exceeds n");
    std::vector<std::uint32_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0u);
    for (std::uint32_t i = 0; i < k; ++i) {
      const std::uint32_t j = i + static_cast<std::uint32_t>(next_below(n - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
  }

  std::vector<std::uint32_t> permutation(std::uint32_t n) {
    return sample_without_replacement(n, n);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

}  // namespace hte
