#pragma once

#include <span>
#include <unordered_map>
#include <vector>

#include "fbgec/text/vocabulary.hpp"

namespace fbgec {

// Sentence-level fluency: f = 1 / (1 + h) where h is the per-token cross
// entropy in nats (end-of-sentence counted as a position). h >= 0, so
// f lies in (0, 1].
struct FluencyScore {
  double h = 0.0;
  double f = 1.0;
};

struct SmoothingParams {
  // Interpolated absolute discounting with an add-one floor at the unigram
  // level. discount 0 plus add_one_unigram=false gives pure MLE, which test
  // fixtures use to build degenerate certainty models.
  double discount = 0.75;
  bool add_one_unigram = true;
};

class NGramModel {
 public:
  // Counts BOS-padded, EOS-terminated n-grams of every order up to `order`.
  // The vocabulary is fixed at training time; out-of-vocabulary tokens are
  // counted as UNK, which is a regular type with its own statistics.
  static NGramModel train(const std::vector<TokenSeq>& corpus, int order,
                          SmoothingParams smoothing, Vocabulary vocab);

  int order() const { return order_; }
  const Vocabulary& vocab() const { return vocab_; }
  const SmoothingParams& smoothing() const { return smoothing_; }

  // Number of types the model distributes mass over (everything but PAD
  // and BOS).
  std::size_t predictable_types() const;

  // Natural-log probability; only the last order-1 context tokens are used.
  // A shorter context is answered by the matching lower-order estimate.
  double log_prob(std::string_view token, const TokenSeq& context) const;
  double prob_id(TokenId token, std::span<const TokenId> context) const;

  double cross_entropy(const TokenSeq& sentence) const;
  FluencyScore fluency(const TokenSeq& sentence) const;

  void save(const std::string& path) const;
  static NGramModel load(const std::string& path);

  // Human-readable probability dump for test fixtures: every observed
  // context with the full predictable distribution.
  void dump(std::ostream& out) const;

 private:
  struct ContextCounts {
    std::uint64_t total = 0;
    std::unordered_map<TokenId, std::uint64_t> counts;
  };

  struct SpanHash {
    using is_transparent = void;
    std::size_t operator()(std::span<const TokenId> key) const {
      std::uint64_t h = 1469598103934665603ull;
      for (TokenId id : key) {
        for (int b = 0; b < 4; ++b) {
          h ^= static_cast<unsigned char>(id >> (8 * b));
          h *= 1099511628211ull;
        }
      }
      return static_cast<std::size_t>(h);
    }
    std::size_t operator()(const TokenIds& key) const {
      return (*this)(std::span<const TokenId>(key));
    }
  };

  struct SpanEq {
    using is_transparent = void;
    bool operator()(std::span<const TokenId> a,
                    std::span<const TokenId> b) const {
      return a.size() == b.size() &&
             std::equal(a.begin(), a.end(), b.begin());
    }
    bool operator()(const TokenIds& a, const TokenIds& b) const {
      return a == b;
    }
    bool operator()(const TokenIds& a, std::span<const TokenId> b) const {
      return (*this)(std::span<const TokenId>(a), b);
    }
    bool operator()(std::span<const TokenId> a, const TokenIds& b) const {
      return (*this)(a, std::span<const TokenId>(b));
    }
  };

  using ContextMap =
      std::unordered_map<TokenIds, ContextCounts, SpanHash, SpanEq>;

  NGramModel() = default;

  double unigram_prob(TokenId token) const;
  double prob_level(TokenId token, std::span<const TokenId> context) const;

  int order_ = 0;
  SmoothingParams smoothing_;
  Vocabulary vocab_;
  // levels_[o-1] holds contexts of length o-1 (level o estimates).
  std::vector<ContextMap> levels_;
  std::uint64_t total_tokens_ = 0;
};

}  // namespace fbgec
