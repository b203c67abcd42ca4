#pragma once

#include <cstdint>
#include <initializer_list>

namespace mir {

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// order-dependent hash of a master seed and a list of indices
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> idx) {
  std::uint64_t h = mix64(master);
  for (std::uint64_t v : idx) h = mix64(h ^ mix64(v + 0x632be59bd9b4e019ull));
  return h;
}

}  // namespace mir
