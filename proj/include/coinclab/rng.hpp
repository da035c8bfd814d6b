#pragma once

#include <cstdint>
#include <limits>

namespace coinclab {

// Counter-keyed random streams. Every random quantity in the simulation is
// drawn from an engine whose seed is derived from (run seed, stream tag,
// index), so results do not depend on processing order or chunking.

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag,
                                    std::uint64_t index = 0) noexcept {
  return mix64(mix64(mix64(seed) ^ tag) ^ index);
}

/// SplitMix64; satisfies UniformRandomBitGenerator.
class StreamEngine {
 public:
  using result_type = std::uint64_t;

  explicit constexpr StreamEngine(std::uint64_t seed) noexcept : state_(seed) {}
  constexpr StreamEngine(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) noexcept
      : state_(derive_seed(seed, tag, index)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

namespace stream_tag {
inline constexpr std::uint64_t kPairs = 0x5041495253ULL;
inline constexpr std::uint64_t kHeraldBackground = 0x48424b47ULL;
inline constexpr std::uint64_t kSignalBackground = 0x53424b47ULL;
inline constexpr std::uint64_t kEfficiency = 0x45464646ULL;
inline constexpr std::uint64_t kJitter = 0x4a495454ULL;
inline constexpr std::uint64_t kSmear = 0x534d4552ULL;
inline constexpr std::uint64_t kRow = 0x524f5753ULL;
inline constexpr std::uint64_t kDetector = 0x44455445ULL;
}  // namespace stream_tag

}  // namespace coinclab
