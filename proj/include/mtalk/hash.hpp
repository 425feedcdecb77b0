#pragma once

#include <cstdint>
#include <string_view>

namespace mtalk {

// FNV-1a, 64 bit. Stable across platforms, used for content hashes that are
// persisted in the compile state.
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

constexpr std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = kFnvOffset) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  for (int i = 0; i < 8; ++i) {
    a ^= (b >> (8 * i)) & 0xffU;
    a *= 0x100000001b3ULL;
  }
  return a;
}

}  // namespace mtalk
