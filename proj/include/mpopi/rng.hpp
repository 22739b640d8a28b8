#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace mpopi {

/// SplitMix64 finalizer. Used both as the engine step and to fold stream
/// coordinates into a seed.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives a child seed from a parent seed and a list of coordinates
/// (e.g. step index, AIS iteration, sample index). The mapping is a pure
/// function, so a substream is addressed by its coordinates rather than by
/// the order in which streams are consumed.
constexpr std::uint64_t derive_seed(std::uint64_t parent,
                                    std::initializer_list<std::uint64_t> coords) noexcept {
  std::uint64_t h = mix64(parent + 0x9e3779b97f4a7c15ULL);
  for (std::uint64_t c : coords) {
    h = mix64(h ^ mix64(c + 0x632be59bd9b4e019ULL));
  }
  return h;
}

/// Small counter-style generator satisfying UniformRandomBitGenerator.
/// Cheap to construct, which matters because every rollout gets its own.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

 private:
  std::uint64_t state_;
};

// Coordinate tags separating the purposes a step seed is split into.
inline constexpr std::uint64_t kNoiseStream = 1;
inline constexpr std::uint64_t kAisStream = 2;
inline constexpr std::uint64_t kInitStream = 3;
inline constexpr std::uint64_t kStepStream = 4;

}  // namespace mpopi
