// Copyright (c) dcalm contributors

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dcalm {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; a bijective mixer on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// 64-bit FNV-1a; stable across platforms, unlike std::hash.
constexpr std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : text) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed for instance `index` of cell `cell_id` under `master`.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view cell_id,
                                    std::uint64_t index) {
  return mix64(mix64(master ^ fnv1a(cell_id)) + index);
}

/// Independent stream `stream` of a given seed.
constexpr std::uint64_t substream(std::uint64_t seed, std::uint64_t stream) {
  return mix64(seed + 0x632be59bd9b4e019ULL * (stream + 1));
}

}  // namespace dcalm
