#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace dirfdr {

// Deterministic substreams keyed by a root seed and a tuple of counters, so
// a substream never depends on how many draws other substreams consumed.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t stream_key(std::uint64_t seed, std::initializer_list<std::uint64_t> counters) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t c : counters) h = splitmix64(h ^ splitmix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

using Rng = std::mt19937_64;

inline Rng substream(std::uint64_t seed, std::initializer_list<std::uint64_t> counters) {
  return Rng(stream_key(seed, counters));
}

// Roles distinguishing substreams that share a (seed, cell, rep) key.
enum class StreamRole : std::uint64_t { Data = 1, Bootstrap = 2 };

}  // namespace dirfdr
