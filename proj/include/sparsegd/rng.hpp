#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sparsegd {

// Derives independent named substreams from one master seed so that adding a
// consumer (e.g. a new noise source) never shifts the draws seen by existing
// ones. Mixing is splitmix64 over (seed, fnv1a(name), index).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t substream_seed(std::uint64_t master, std::string_view name,
                                    std::uint64_t index = 0) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ fnv1a(name));
  h = splitmix64(h ^ index);
  return h;
}

inline std::mt19937_64 make_engine(std::uint64_t master, std::string_view name,
                                   std::uint64_t index = 0) {
  return std::mt19937_64(substream_seed(master, name, index));
}

}  // namespace sparsegd
