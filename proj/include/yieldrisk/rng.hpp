// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0
//
// Seed derivation for deterministic per-task random substreams. A substream
// depends only on (seed, key, index), never on scheduling or task order.

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace yieldrisk {

using Rng = std::mt19937_64;

constexpr uint64_t splitmix64(uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a; stable across platforms and runs, unlike std::hash.
constexpr uint64_t stable_hash(std::string_view s) noexcept {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr uint64_t derive_seed(uint64_t seed, std::string_view key, int64_t index) noexcept {
  uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ stable_hash(key));
  s = splitmix64(s ^ static_cast<uint64_t>(index));
  return s;
}

inline Rng make_substream(uint64_t seed, std::string_view key, int64_t index) {
  return Rng(derive_seed(seed, key, index));
}

}  // namespace yieldrisk
