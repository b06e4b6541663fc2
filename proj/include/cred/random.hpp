#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace cred {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for a named sub-stream, e.g. derive_seed(seed, {user, iteration}).
inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix_seed(base);
  for (std::uint64_t p : path) s = mix_seed(s ^ mix_seed(p + 0x51ed270b27a3a5c1ULL));
  return s;
}

}  // namespace cred
