#pragma once

// Portable seeded randomness. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard; the distributions below are spelled out
// here because the standard library's are implementation-defined.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace firmsaudit {

/// 128-bit products for exact multiply-shift and expected-count arithmetic.
__extension__ typedef unsigned __int128 uint128;

inline constexpr std::string_view kRngAlgorithm =
    "mt19937_64; stream seed = splitmix64(splitmix64(master) ^ stream); bounded ints by Lemire multiply-shift";

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for an independent stream `stream` under `master`. Iterations,
/// partitions and blocks each take their own stream index so results do not
/// depend on scheduling.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ stream);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t master, std::uint64_t stream) : engine_(derive_seed(master, stream)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, bound), bound > 0.
  std::uint64_t below(std::uint64_t bound) {
    auto m = static_cast<uint128>(engine_()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<uint128>(engine_()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (one variate per call, the second is
  /// discarded to keep the stream position independent of call history).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace firmsaudit
