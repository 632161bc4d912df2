#pragma once

// Seeded random streams. Each scan gets its own generator derived from
// (scan id, seed), so results do not depend on execution order.

#include <cmath>
#include <cstdint>
#include <utility>
#include <random>
#include <string_view>

namespace sas {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

using Rng = std::mt19937_64;

inline Rng derive_stream(std::string_view scan_id, std::uint64_t seed) {
  return Rng(splitmix64(seed ^ fnv1a(scan_id)));
}

/// Uniform in [0, 1) from the top 53 bits; identical on every platform,
/// unlike std::uniform_real_distribution.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Standard normal pair by Box-Muller on uniform01.
inline std::pair<double, double> normal_pair(Rng& rng) {
  const double u1 = 1.0 - uniform01(rng);  // (0, 1]
  const double u2 = uniform01(rng);
  const double rad = std::sqrt(-2.0 * std::log(u1));
  const double ang = 6.283185307179586 * u2;
  return {rad * std::cos(ang), rad * std::sin(ang)};
}

}  // namespace sas
