#pragma once

#include <cstdint>
#include <string_view>

namespace fanfire {

// Stable 64-bit mixing, used for scheduler tie-breaking and failure
// injection.  Deliberately not std::hash: results must be identical across
// platforms and library versions, since seeds are part of the public
// reproducibility contract.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Incremental combiner: feed values, read digest.
struct HashStream {
  std::uint64_t h;
  explicit HashStream(std::uint64_t seed) : h(splitmix64(seed)) {}
  HashStream& mix(std::uint64_t v) {
    h = splitmix64(h ^ v);
    return *this;
  }
  HashStream& mix(std::string_view s) { return mix(fnv1a(s)); }
  std::uint64_t digest() const { return h; }
};

}  // namespace fanfire
