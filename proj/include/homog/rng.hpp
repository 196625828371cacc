#pragma once

#include <cstdint>

namespace homog {

/// splitmix64 finalizer; counter-based so any (seed, counters) tuple maps to
/// an i.i.d.-quality word independent of evaluation order.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t a,
                                  std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc908ull);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  h = mix64(h ^ c);
  return h;
}

/// Uniform double in [0,1) from a 64-bit word.
inline double to_unit(std::uint64_t h) {
  return double(h >> 11) * 0x1.0p-53;
}

inline double unit_uniform(std::uint64_t seed, std::uint64_t a,
                           std::uint64_t b = 0, std::uint64_t c = 0) {
  return to_unit(hash_combine(seed, a, b, c));
}

}  // namespace homog
