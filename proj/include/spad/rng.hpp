#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace spad {

using Rng = std::mt19937_64;

/// SplitMix64 finaliser.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Folds a sequence of stream identifiers into one 64-bit seed:
/// s <- splitmix64(s ^ splitmix64(part)) for each part, starting from zero.
constexpr std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t s = 0;
  for (std::uint64_t p : parts) s = splitmix64(s ^ splitmix64(p));
  return s;
}

}  // namespace spad
