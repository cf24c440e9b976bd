#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace spinstat {

// SplitMix64 finalizer (Steele, Lea & Flood 2014). Used as a stateless
// counter-based generator: the value for counter i depends only on (key, i),
// so a parallel loop over samples draws the same stream as a serial one.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix_key(std::uint64_t key, std::uint64_t counter) {
  return splitmix64(splitmix64(key) ^ (counter * 0xd1b54a32d192ed03ULL));
}

// Uniform in the open interval (0, 1), 53-bit resolution.
constexpr double counter_uniform(std::uint64_t key, std::uint64_t counter) {
  return (static_cast<double>(mix_key(key, counter) >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal deviate for sample index i (Box-Muller, cosine branch).
inline double counter_normal(std::uint64_t key, std::uint64_t i) {
  const double u1 = counter_uniform(key, 2 * i);
  const double u2 = counter_uniform(key, 2 * i + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Seed for trial `index` of a run keyed by `master`.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix_key(master ^ 0x5851f42d4c957f2dULL, index);
}

// FNV-1a, 64 bit. Content hashes for provenance blocks.
constexpr std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace spinstat
