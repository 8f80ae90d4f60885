#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace laproute {

// splitmix64 finalizer; decorrelates derived seeds
inline std::uint64_t hash_mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Named substream of a root seed (fnv1a over the name, mixed with the root).
inline std::uint64_t stream_seed(std::uint64_t root, std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return hash_mix(root ^ hash_mix(h));
}

inline std::uint64_t indexed_seed(std::uint64_t root, std::uint64_t index) {
  return hash_mix(root ^ hash_mix(0x5eed0000ULL + index));
}

inline std::mt19937_64 make_stream(std::uint64_t root, std::string_view name) {
  return std::mt19937_64(stream_seed(root, name));
}

}  // namespace laproute
