#pragma once

// Deterministic per-task random streams. Every replication, truth, or
// check draws from its own engine seeded by hashing (seed, stream, a, b),
// so results do not depend on execution order or thread count.

#include <cstdint>
#include <random>

namespace aggreg::rng {

enum class Stream : std::uint64_t {
  noise = 1,
  design = 2,
  dictionary = 3,
  holdout = 4,
  check = 5,
};

// splitmix64 finalizer.
constexpr std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive(std::uint64_t seed, Stream s, std::uint64_t a = 0, std::uint64_t b = 0) {
  return mix(mix(mix(mix(seed) ^ static_cast<std::uint64_t>(s)) ^ a) ^ b);
}

inline std::mt19937_64 engine(std::uint64_t seed, Stream s, std::uint64_t a = 0, std::uint64_t b = 0) {
  return std::mt19937_64(derive(seed, s, a, b));
}

}  // namespace aggreg::rng
