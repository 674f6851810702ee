#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "fbgec/common.hpp"

namespace fbgec {

// FNV-1a, used for content manifests, vocabulary fingerprints and the
// candidate-store owner keys. Not cryptographic; collisions are acceptable
// for provenance bookkeeping at this scale.
constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t seed = kFnvOffset) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

// Tokens are joined with a separator that cannot occur inside a token.
std::uint64_t hash_tokens(const TokenSeq& tokens);

std::string to_hex(std::uint64_t value);

// Content hash of a file on disk. Throws IoError if unreadable.
std::uint64_t hash_file(const std::string& path);

}  // namespace fbgec
