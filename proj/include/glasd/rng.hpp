#pragma once

#include <cstdint>
#include <random>

namespace glasd {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Child seed for (stream, index) under a parent seed. Streams separate
/// unrelated consumers (data generation, restarts, ...) of one master seed.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream,
                                    std::uint64_t index = 0) noexcept {
  return mix64(mix64(mix64(parent) ^ (stream * 0xd1b54a32d192ed03ULL)) ^ index);
}

namespace streams {
inline constexpr std::uint64_t kRestart = 1;
inline constexpr std::uint64_t kReplicate = 2;
inline constexpr std::uint64_t kStructure = 3;
inline constexpr std::uint64_t kSample = 4;
inline constexpr std::uint64_t kContaminate = 5;
inline constexpr std::uint64_t kEstimate = 6;
}  // namespace streams

}  // namespace glasd
