#pragma once

#include <cstdint>
#include <string_view>

namespace facetag {

// Stable 64-bit keys derived from (seed, name). Sorting items by these keys
// gives a seeded permutation that does not depend on processing order,
// thread count, or the standard library's distribution implementations.

constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t order_key(std::uint64_t seed, std::string_view name) noexcept {
  return splitmix64(seed ^ splitmix64(fnv1a64(name)));
}

}  // namespace facetag
