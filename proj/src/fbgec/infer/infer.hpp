#pragma once

#include "fbgec/lm/ngram.hpp"
#include "fbgec/seq2seq/decode.hpp"

namespace fbgec {

struct RerankWeights {
  double model_score = 1.0;  // length-normalized log probability
  double fluency = 1.0;      // f(hypothesis)
  double edit = 0.1;         // token-level edit distance to the source
};

struct InferenceConfig {
  int nbest = 12;
  int beam = 12;
  int max_rounds = 5;
  int max_len_margin = 8;
  RerankWeights weights;
  // Round-way stages accept their output only when fluency strictly
  // improves; turning the guard off reproduces the unconditional variant.
  bool guarded_roundway = true;
  // Run the full multi-round loop inside each round-way stage instead of a
  // single pass.
  bool multiround_stages = false;

  void validate() const;
};

// Where n-best lists come from: a real model (possibly an ensemble) or a
// test fixture.
class NBestSource {
 public:
  virtual ~NBestSource() = default;
  virtual std::vector<Hypothesis> nbest(const TokenSeq& input, int beam,
                                        int n, int max_len) const = 0;
  virtual Direction direction() const = 0;
};

class ModelNBestSource : public NBestSource {
 public:
  explicit ModelNBestSource(std::vector<const CorrectionModel*> models);

  std::vector<Hypothesis> nbest(const TokenSeq& input, int beam, int n,
                                int max_len) const override;
  Direction direction() const override;

 private:
  std::vector<const CorrectionModel*> models_;
};

// argmax over the n-best of
//   w_model * normalized model score + w_fluency * f(h) - w_edit * dist(h, source)
// with ties resolved toward the lower beam index.
TokenSeq rerank(std::span<const Hypothesis> nbest, const TokenSeq& source,
                const NGramModel& lm, const RerankWeights& weights);

TokenSeq correct_single(const NBestSource& source, const TokenSeq& x,
                        const InferenceConfig& cfg, const NGramModel& lm);

struct TraceStep {
  int round = 0;
  std::string stage;  // single | multi | r2l | l2r
  TokenSeq input;
  TokenSeq output;
  double f_before = 0.0;
  double f_after = 0.0;
  bool accepted = false;
};
using CorrectionTrace = std::vector<TraceStep>;

// Iterates correction while fluency strictly improves; stops on the first
// non-improving round or after max_rounds accepted rounds.
std::pair<TokenSeq, CorrectionTrace> correct_multi_round(
    const NBestSource& source, const TokenSeq& x, const InferenceConfig& cfg,
    const NGramModel& lm, const std::string& stage_tag = "multi");

// Right-to-left then left-to-right, each stage guarded by the fluency
// check (unless disabled). Throws DirectionError when the sources' decoding
// directions do not match their roles.
std::pair<TokenSeq, CorrectionTrace> correct_round_way(
    const NBestSource& r2l, const NBestSource& l2r, const TokenSeq& x,
    const InferenceConfig& cfg, const NGramModel& lm);

}  // namespace fbgec
