#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace qae {

// splitmix64; used to derive independent, reproducible substreams from one
// master seed so that every stochastic evaluation replays exactly.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t combine_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(seed);
  for (std::uint64_t p : path) h = mix64(h ^ mix64(p));
  return h;
}

inline std::mt19937_64 make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  return std::mt19937_64(combine_seed(seed, path));
}

// Stream tags per subsystem, kept distinct so reordering experiments cannot
// alias their random draws.
namespace stream {
inline constexpr std::uint64_t kHqca = 0x68716361;       // "hqca"
inline constexpr std::uint64_t kPqc = 0x707163;          // "pqc"
inline constexpr std::uint64_t kProtocol = 0x70726f74;   // "prot"
inline constexpr std::uint64_t kTomography = 0x746f6d6f; // "tomo"
inline constexpr std::uint64_t kSweep = 0x73777065;      // "swpe"
}  // namespace stream

}  // namespace qae
