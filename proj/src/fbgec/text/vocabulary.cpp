#include "fbgec/text/vocabulary.hpp"

#include <algorithm>
#include <fstream>

#include "fbgec/hash.hpp"

namespace fbgec {

Vocabulary::Vocabulary() {
  surfaces_ = {"<pad>", "<unk>", "<bos>", "<eos>"};
  for (std::size_t i = 0; i < surfaces_.size(); ++i) {
    ids_.emplace(surfaces_[i], static_cast<TokenId>(i));
  }
}

Vocabulary Vocabulary::build(const std::vector<TokenSeq>& corpus,
                             std::size_t max_size) {
  if (max_size < kNumReserved) {
    throw Error(ErrorCode::kInvalidArgument,
                "vocabulary max_size must be >= " +
                    std::to_string(kNumReserved));
  }
  std::unordered_map<std::string, std::uint64_t> freq;
  for (const auto& sentence : corpus) {
    for (const auto& token : sentence) ++freq[token];
  }
  std::vector<std::pair<std::string, std::uint64_t>> entries(freq.begin(),
                                                             freq.end());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary vocab;
  std::size_t capacity = max_size - kNumReserved;
  for (std::size_t i = 0; i < entries.size() && i < capacity; ++i) {
    TokenId id = static_cast<TokenId>(vocab.surfaces_.size());
    vocab.ids_.emplace(entries[i].first, id);
    vocab.surfaces_.push_back(entries[i].first);
  }
  return vocab;
}

Vocabulary Vocabulary::from_surfaces(std::vector<std::string> surfaces) {
  if (surfaces.size() < kNumReserved) {
    throw Error(ErrorCode::kInvalidArgument,
                "surface list misses the reserved ids");
  }
  Vocabulary vocab;
  vocab.surfaces_ = std::move(surfaces);
  vocab.ids_.clear();
  for (std::size_t i = 0; i < vocab.surfaces_.size(); ++i) {
    vocab.ids_.emplace(vocab.surfaces_[i], static_cast<TokenId>(i));
  }
  return vocab;
}

TokenId Vocabulary::id(std::string_view surface) const {
  auto it = ids_.find(std::string(surface));
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view surface) const {
  return ids_.find(std::string(surface)) != ids_.end();
}

const std::string& Vocabulary::surface(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= surfaces_.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "token id out of range: " + std::to_string(id));
  }
  return surfaces_[static_cast<std::size_t>(id)];
}

TokenIds Vocabulary::encode(const TokenSeq& tokens) const {
  TokenIds ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

TokenSeq Vocabulary::decode(std::span<const TokenId> ids) const {
  TokenSeq tokens;
  tokens.reserve(ids.size());
  for (TokenId id : ids) tokens.push_back(surface(id));
  return tokens;
}

std::uint64_t Vocabulary::fingerprint() const {
  return hash_tokens(surfaces_);
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write vocabulary: " + path);
  for (const auto& surface : surfaces_) out << surface << '\n';
  if (!out) throw IoError("failed writing vocabulary: " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read vocabulary: " + path);
  Vocabulary vocab;
  vocab.surfaces_.clear();
  vocab.ids_.clear();
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    TokenId id = static_cast<TokenId>(vocab.surfaces_.size());
    vocab.ids_.emplace(line, id);
    vocab.surfaces_.push_back(line);
  }
  if (vocab.surfaces_.size() < kNumReserved) {
    throw ParseError("vocabulary file too short: " + path,
                     vocab.surfaces_.size());
  }
  return vocab;
}

}  // namespace fbgec
