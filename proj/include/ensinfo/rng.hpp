#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ensinfo {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for an independent stream identified by (master, indices...). Streams
// never depend on the order in which they are requested.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> indices) noexcept {
  std::uint64_t s = splitmix64(master);
  for (std::uint64_t i : indices) s = splitmix64(s ^ splitmix64(i + 0x632be59bd9b4e019ULL));
  return s;
}

using Rng = std::mt19937_64;

}  // namespace ensinfo
