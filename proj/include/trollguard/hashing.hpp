#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace trollguard {

// 64-bit FNV-1a. Used for content fingerprints and per-stage seed labels.
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = kFnvOffset) noexcept {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

/// 16 lowercase hex digits.
std::string hex64(std::uint64_t value);
std::uint64_t parse_hex64(std::string_view text);

}  // namespace trollguard
