#pragma once

#include <span>

#include "fbgec/seq2seq/model.hpp"

namespace fbgec {

struct Hypothesis {
  TokenSeq tokens;        // natural reading order, EOS stripped
  double log_prob = 0.0;  // sum of per-step log probabilities incl. EOS
  std::size_t steps = 0;  // decoded steps incl. EOS
  bool complete = false;

  double normalized_score() const {
    return log_prob / static_cast<double>(steps == 0 ? 1 : steps);
  }
};

// n-best beam search. Hypotheses come back sorted by length-normalized log
// probability, ties kept in generation order. Right-to-left models decode
// reversed targets internally; outputs are un-reversed before return.
// EOS is forced once max_len steps are reached, so at least one hypothesis
// always comes back.
std::vector<Hypothesis> beam_search(const CorrectionModel& model,
                                    const TokenSeq& input, int beam, int n,
                                    int max_len);

// Per-step distributions are the arithmetic mean of the member
// distributions. Members must share direction and vocabulary.
std::vector<Hypothesis> ensemble_beam_search(
    std::span<const CorrectionModel* const> models, const TokenSeq& input,
    int beam, int n, int max_len);

// Score an output sequence (natural order) under the model(s): the sum of
// per-step log probabilities including the EOS step, computed with the same
// masked distributions the beam uses.
double sequence_log_prob(const CorrectionModel& model, const TokenSeq& input,
                         const TokenSeq& output);
double ensemble_sequence_log_prob(std::span<const CorrectionModel* const> models,
                                  const TokenSeq& input,
                                  const TokenSeq& output);

TokenSeq greedy_decode(const CorrectionModel& model, const TokenSeq& input,
                       int max_len);

}  // namespace fbgec
