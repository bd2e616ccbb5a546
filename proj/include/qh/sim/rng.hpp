#pragma once

#include <cstdint>
#include <random>

namespace qh::sim {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of path `index` under ensemble seed `seed`: two mixing rounds so that
/// neighbouring (seed, index) pairs give unrelated streams.
constexpr std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

using PathRng = std::mt19937_64;

inline PathRng path_rng(std::uint64_t seed, std::uint64_t index) { return PathRng(path_seed(seed, index)); }

}  // namespace qh::sim
