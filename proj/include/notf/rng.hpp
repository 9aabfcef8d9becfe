#pragma once

// Seedable random streams with reproducible output across standard libraries.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The std distributions are implementation-defined, so conversion
// to doubles and bounded integers is done here:
//   uniform01      (x >> 11) * 2^-53                  in [0, 1)
//   uniform_open01 ((x >> 11) + 0.5) * 2^-53          in (0, 1)
//   below(n)       rejection sampling on the top bits in [0, n)
//
// Substreams: stream s of seed k is seeded with splitmix64(k ^ splitmix64(s)),
// so e.g. factor generation and flip noise never share draws.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace notf {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Named substreams.
enum class Stream : std::uint64_t {
  FactorA = 1,
  FactorB = 2,
  FactorC = 3,
  FlipNoise = 4,
  CpInit = 5,
};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, Stream stream)
      : engine_(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream)))) {}

  std::uint64_t next() { return engine_(); }

  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform_open01() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

  // Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    int bits = 64 - __builtin_clzll(n - 1);
    for (;;) {
      std::uint64_t x = next() >> (64 - bits);
      if (x < n) return x;
    }
  }

  // `count` distinct values from [0, n), in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    for (std::size_t i = 0; i < count && i < n; ++i) {
      std::size_t j = i + static_cast<std::size_t>(below(n - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(std::min(count, n));
    return pool;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace notf
