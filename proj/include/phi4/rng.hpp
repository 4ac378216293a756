#pragma once

#include <cstdint>
#include <random>

namespace phi4 {

using Rng = std::mt19937_64;

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Independent stream `stream` of master seed `seed`. Reseeding is cheap enough
/// to do once per time step.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return Rng(detail::splitmix64(detail::splitmix64(seed) ^ detail::splitmix64(~stream)));
}

}  // namespace phi4
