#pragma once

#include <cstdint>
#include <random>

namespace linrs {

/// splitmix64 finalizer, used to decorrelate derived seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent generator for (seed, a, b), e.g. (seed, sweep point, trial).
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return std::mt19937_64(mix_seed(mix_seed(mix_seed(seed) ^ a) ^ b));
}

}  // namespace linrs
