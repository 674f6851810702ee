#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fbgec/common.hpp"

namespace fbgec {

// Word-level vocabulary with four reserved ids. Construction is
// deterministic: most frequent surfaces first, frequency ties broken
// lexicographically.
class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;
  static constexpr TokenId kBos = 2;
  static constexpr TokenId kEos = 3;
  static constexpr std::size_t kNumReserved = 4;

  Vocabulary();

  // max_size counts the reserved ids; must be >= 4.
  static Vocabulary build(const std::vector<TokenSeq>& corpus,
                          std::size_t max_size);

  // Rebuilds a vocabulary from a complete, ordered surface list (reserved
  // ids first), as stored in model files.
  static Vocabulary from_surfaces(std::vector<std::string> surfaces);

  std::size_t size() const { return surfaces_.size(); }

  // UNK for out-of-vocabulary surfaces.
  TokenId id(std::string_view surface) const;
  bool contains(std::string_view surface) const;
  const std::string& surface(TokenId id) const;

  TokenIds encode(const TokenSeq& tokens) const;
  TokenSeq decode(std::span<const TokenId> ids) const;

  // Order-sensitive fingerprint used to pair checkpoints with the
  // vocabulary they were trained against.
  std::uint64_t fingerprint() const;

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> surfaces_;
  std::unordered_map<std::string, TokenId> ids_;
};

}  // namespace fbgec
