#pragma once

#include <cstdint>
#include <initializer_list>

namespace edmlp {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a master seed and a path of
/// indices, e.g. derive_seed(master, {realization, case_index, purpose}).
/// The result depends on the order of the indices.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(master);
  for (std::uint64_t v : path) h = mix64(h ^ mix64(v + 0x632be59bd9b4e019ULL));
  return h;
}

// Stream purposes, so that one (realization, fold) pair can feed several
// independent generators.
namespace stream {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kBalance = 2;
inline constexpr std::uint64_t kSplit = 3;
inline constexpr std::uint64_t kSample = 4;
}  // namespace stream

}  // namespace edmlp
