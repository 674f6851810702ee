#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <unordered_map>
#include <unordered_set>

#include "fbgec/lm/ngram.hpp"
#include "fbgec/seq2seq/train.hpp"

namespace fbgec {

struct BoostConfig {
  double sigma = 1.05;  // fluency ratio threshold, must be > 1
  int nbest = 10;       // candidate-generation n-best size
  int beam = 10;
  int epochs = 10;
  int gen_epochs = -1;  // back-boost generator pretraining; -1 means epochs
  std::uint64_t seed = 1;
  int max_len_margin = 8;
  // Whether the corrector may generate candidates from already-correct
  // sources (native self-copied pairs) in self/dual mode.
  bool native_self_candidates = true;

  void validate() const;
  int generator_epochs() const { return gen_epochs < 0 ? epochs : gen_epochs; }
};

// True iff pairing (candidate -> x_c) is a fluency boost pair:
// f(x_c) / f(candidate) >= sigma.
bool fluency_boost_condition(const TokenSeq& x_c, const TokenSeq& candidate,
                             const NGramModel& lm, double sigma);

// Append-only record log of accepted disfluency candidates; one line per
// inserted member. Readable back for audits.
class CandidateStore {
 public:
  struct Record {
    std::string owner_hash;
    int epoch = 0;
    std::string strategy;
    double f_ratio = 0.0;
    TokenSeq member;
  };

  // Truncates and writes the header.
  static CandidateStore create(const std::string& path);

  void append(const TokenSeq& owner, int epoch, const std::string& strategy,
              double f_ratio, const TokenSeq& member);
  void flush();

  static std::vector<Record> read_all(const std::string& path);

 private:
  CandidateStore() = default;
  std::shared_ptr<std::ofstream> out_;
  std::string path_;
};

// Deduplicated set of less-fluent variants of one correct sentence. Members
// only accumulate; every member passed the sigma condition at insert time
// and never equals the owner.
class DisfluencyCandidateSet {
 public:
  DisfluencyCandidateSet() = default;
  DisfluencyCandidateSet(TokenSeq owner, std::string strategy);

  const TokenSeq& owner() const { return owner_; }
  const std::string& strategy() const { return strategy_; }
  const std::vector<TokenSeq>& members() const { return members_; }
  bool empty() const { return members_.empty(); }
  std::size_t size() const { return members_.size(); }
  bool contains(const TokenSeq& candidate) const;

  // Returns true when the member was new and accepted. `f_ratio` is
  // f(owner)/f(member) at generation time.
  bool insert(const TokenSeq& member, double f_ratio, int epoch,
              CandidateStore* store);

 private:
  TokenSeq owner_;
  std::string strategy_;
  std::vector<TokenSeq> members_;
  std::unordered_set<std::string> keys_;
};

// Back-boost candidates: n-best outputs of the error-generation model on
// the correct sentence, filtered by the sigma condition.
DisfluencyCandidateSet gen_back_candidates(const CorrectionModel& gen,
                                           const TokenSeq& x_c,
                                           const BoostConfig& cfg,
                                           const NGramModel& lm,
                                           CandidateStore* store = nullptr,
                                           int epoch = 0);

// Self-boost update: adds the corrector's filtered n-best on the raw side.
void update_self_candidates(const CorrectionModel& crt,
                            const SentencePair& pair,
                            DisfluencyCandidateSet& set,
                            const BoostConfig& cfg, const NGramModel& lm,
                            CandidateStore* store = nullptr, int epoch = 0);

// Dual update: corrector n-best on the raw side plus generator n-best on
// the correct side.
void update_dual_candidates(const CorrectionModel& crt,
                            const CorrectionModel& gen,
                            const SentencePair& pair,
                            DisfluencyCandidateSet& set,
                            const BoostConfig& cfg, const NGramModel& lm,
                            CandidateStore* store = nullptr, int epoch = 0);

// S* plus the self-copied native pairs C; S = S* ∪ C.
struct TrainingPools {
  std::vector<SentencePair> original;  // S*
  std::vector<SentencePair> native;    // C

  std::size_t combined_size() const {
    return original.size() + native.size();
  }
  const SentencePair& combined_at(std::size_t i) const {
    return i < original.size() ? original[i]
                               : native[i - original.size()];
  }
};

struct EpochSample {
  std::vector<std::size_t> sampled;         // indices into the combined pool
  std::vector<SentencePair> boost_pairs;    // S': (x', x^c)
  std::vector<SentencePair> reversed_pairs; // S'': (x^c, x'')
};

// Draws S_t of size min(|S|, |S*|) without replacement, then one boost pair
// per sampled element whose candidate set is non-empty (plus one reversed
// pair in dual mode). The lookup may update candidate sets on the fly, which
// is how Algorithms 2 and 3 interleave generation with sampling.
using CandidateLookup = std::function<const DisfluencyCandidateSet*(
    const SentencePair& pair, std::size_t combined_index)>;

EpochSample sample_epoch(const TrainingPools& pools,
                         const CandidateLookup& lookup, Rng& rng, bool dual);

struct StrategyOptions {
  BoostConfig boost;
  ModelConfig model;  // dims and dropout; role seeds are derived internally
  TrainOptions train;
  std::size_t jobs = 1;
};

struct EpochLog {
  int epoch = 0;
  double crt_loss = 0.0;
  double gen_loss = 0.0;
  std::size_t boost_pairs = 0;
  std::size_t reversed_pairs = 0;
  std::size_t epoch_set_size = 0;
};
using EpochLogger = std::function<void(const EpochLog&)>;

// Plain MLE training on S* alone; the baseline every strategy reduces to
// when no candidate survives the filter. Uses the same derived seed streams
// as the strategy runners so trajectories are comparable step for step.
CorrectionModel train_plain(const std::vector<SentencePair>& s_star,
                            const StrategyOptions& options,
                            std::shared_ptr<const Vocabulary> vocab,
                            const std::vector<SentencePair>* dev = nullptr,
                            const EpochLogger& log = {});

CorrectionModel run_back_boost(const std::vector<SentencePair>& s_star,
                               const std::vector<SentencePair>& native,
                               const StrategyOptions& options,
                               const NGramModel& lm,
                               std::shared_ptr<const Vocabulary> vocab,
                               CandidateStore* store = nullptr,
                               const std::vector<SentencePair>* dev = nullptr,
                               const EpochLogger& log = {});

CorrectionModel run_self_boost(const std::vector<SentencePair>& s_star,
                               const std::vector<SentencePair>& native,
                               const StrategyOptions& options,
                               const NGramModel& lm,
                               std::shared_ptr<const Vocabulary> vocab,
                               CandidateStore* store = nullptr,
                               const std::vector<SentencePair>* dev = nullptr,
                               const EpochLogger& log = {});

// Returns (corrector, generator).
std::pair<CorrectionModel, CorrectionModel> run_dual_boost(
    const std::vector<SentencePair>& s_star,
    const std::vector<SentencePair>& native, const StrategyOptions& options,
    const NGramModel& lm, std::shared_ptr<const Vocabulary> vocab,
    CandidateStore* store = nullptr,
    const std::vector<SentencePair>* dev = nullptr,
    const EpochLogger& log = {});

// Interchanged pairs: sources and targets swapped (the generator's training
// data).
std::vector<SentencePair> interchange_pairs(
    std::span<const SentencePair> pairs);

}  // namespace fbgec
