#pragma once

#include <cstdint>
#include <random>

namespace percept {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Counter-mode seed splitting: child streams are a pure function of
// (master, stream, counter), so parallel execution order cannot change them.
inline uint64_t derive_seed(uint64_t master, uint64_t stream, uint64_t counter = 0) {
  return splitmix64(splitmix64(master ^ 0x6a09e667f3bcc909ull) ^
                    splitmix64(stream * 0x9e3779b97f4a7c15ull + counter));
}

using Rng = std::mt19937_64;

inline Rng make_rng(uint64_t seed) { return Rng(splitmix64(seed)); }

}  // namespace percept
