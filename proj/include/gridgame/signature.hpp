#pragma once

#include <cstdint>
#include <string_view>

namespace gridgame {

/// 31-bit FNV-1a hash of a vulnerability id, never 0.
constexpr std::uint32_t signature_id(std::string_view vulnerability_id) {
  std::uint32_t h = 2166136261u;
  for (char c : vulnerability_id) {
    h ^= static_cast<unsigned char>(c);
    h *= 16777619u;
  }
  h &= 0x7fffffffu;
  return h == 0 ? 1u : h;
}

/// Benign signatures used for background noise: kBenignBase + [0, kBenignCount).
inline constexpr std::uint32_t kBenignBase = 1000001;
inline constexpr std::uint32_t kBenignCount = 32;

constexpr bool is_benign_signature(std::uint32_t sid) { return sid >= kBenignBase && sid < kBenignBase + kBenignCount; }

/// 64-bit FNV-1a, used for content hashes.
constexpr std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace gridgame
