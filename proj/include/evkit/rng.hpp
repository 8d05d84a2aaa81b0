#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace evkit {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Keyed child seeds: a stream keyed by name or index never depends on which
// other keys exist, so adding a portfolio or a replication leaves the others
// untouched.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view key) {
  return splitmix64(root ^ splitmix64(fnv1a(key)));
}
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
  return splitmix64(root ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

}  // namespace evkit
