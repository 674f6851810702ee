#include "fbgec/seq2seq/decode.hpp"

#include <algorithm>
#include <cmath>

namespace fbgec {

namespace {

void check_ensemble(std::span<const CorrectionModel* const> models) {
  if (models.empty()) {
    throw EnsembleMismatchError("ensemble needs at least one model");
  }
  const CorrectionModel& first = *models.front();
  for (const CorrectionModel* m : models) {
    if (m->config().direction != first.config().direction) {
      throw EnsembleMismatchError("ensemble members disagree on direction");
    }
    if (m->vocab().fingerprint() != first.vocab().fingerprint()) {
      throw EnsembleMismatchError("ensemble members disagree on vocabulary");
    }
  }
}

struct BeamEntry {
  TokenIds ids;
  double log_prob = 0.0;
  std::vector<DecoderState> states;  // one per ensemble member
};

// Mean next-token distribution after feeding `prev`; advances all states.
VectorXd ensemble_step(std::span<const CorrectionModel* const> models,
                       std::span<const EncodedSource> sources,
                       std::vector<DecoderState>& states, TokenId prev) {
  VectorXd mean;
  for (std::size_t m = 0; m < models.size(); ++m) {
    VectorXd probs = decode_step(*models[m], sources[m], states[m], prev);
    if (m == 0) {
      mean = probs;
    } else {
      mean += probs;
    }
  }
  mean /= static_cast<double>(models.size());
  return mean;
}

std::vector<Hypothesis> beam_search_impl(
    std::span<const CorrectionModel* const> models, const TokenSeq& input,
    int beam, int n, int max_len) {
  check_ensemble(models);
  if (n < 1 || beam < 1) {
    throw Error(ErrorCode::kInvalidArgument, "beam and n must be >= 1");
  }
  if (n > beam) {
    throw Error(ErrorCode::kInvalidArgument, "n-best size must be <= beam");
  }
  if (max_len < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_len must be >= 1");
  }

  const CorrectionModel& head = *models.front();
  const Vocabulary& vocab = head.vocab();
  const bool reversed = head.config().direction == Direction::kRightToLeft;

  TokenIds src_ids = vocab.encode(input);
  if (src_ids.empty()) throw EmptyInputError("beam_search: empty input");

  std::vector<EncodedSource> sources;
  sources.reserve(models.size());
  for (const CorrectionModel* m : models) {
    sources.push_back(encode_source(*m, src_ids));
  }

  std::vector<BeamEntry> live(1);
  live[0].states.reserve(models.size());
  for (const auto& src : sources) live[0].states.push_back({src.s0});

  std::vector<Hypothesis> pool;
  auto finish = [&](const BeamEntry& entry, double log_prob) {
    Hypothesis hyp;
    TokenIds ids = entry.ids;
    if (reversed) std::reverse(ids.begin(), ids.end());
    hyp.tokens = vocab.decode(ids);
    hyp.log_prob = log_prob;
    hyp.steps = entry.ids.size() + 1;  // +1 for EOS
    hyp.complete = true;
    pool.push_back(std::move(hyp));
  };

  for (int step = 1; step <= max_len && !live.empty(); ++step) {
    struct Candidate {
      std::size_t parent;
      TokenId token;
      double log_prob;
    };
    std::vector<Candidate> candidates;
    std::vector<std::vector<DecoderState>> advanced(live.size());
    for (std::size_t e = 0; e < live.size(); ++e) {
      BeamEntry& entry = live[e];
      TokenId prev = entry.ids.empty() ? Vocabulary::kBos : entry.ids.back();
      advanced[e] = entry.states;
      VectorXd probs = ensemble_step(models, sources, advanced[e], prev);
      if (step == max_len) {
        // Out of budget: force EOS on every live entry.
        finish(entry,
               entry.log_prob + std::log(probs(Vocabulary::kEos)));
        continue;
      }
      for (Eigen::Index tok = 0; tok < probs.size(); ++tok) {
        double p = probs(tok);
        if (p <= 0.0) continue;
        if (step == 1 && tok == Vocabulary::kEos) continue;  // no empty output
        candidates.push_back(
            {e, static_cast<TokenId>(tok), entry.log_prob + std::log(p)});
      }
    }
    if (step == max_len) break;

    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) {
                if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
                if (a.parent != b.parent) return a.parent < b.parent;
                return a.token < b.token;
              });
    if (candidates.size() > static_cast<std::size_t>(beam)) {
      candidates.resize(static_cast<std::size_t>(beam));
    }

    std::vector<BeamEntry> next;
    for (const Candidate& c : candidates) {
      if (c.token == Vocabulary::kEos) {
        finish(live[c.parent], c.log_prob);
        continue;
      }
      BeamEntry entry;
      entry.ids = live[c.parent].ids;
      entry.ids.push_back(c.token);
      entry.log_prob = c.log_prob;
      entry.states = advanced[c.parent];
      next.push_back(std::move(entry));
    }
    live = std::move(next);
  }

  std::stable_sort(pool.begin(), pool.end(),
                   [](const Hypothesis& a, const Hypothesis& b) {
                     return a.normalized_score() > b.normalized_score();
                   });
  if (pool.size() > static_cast<std::size_t>(n)) {
    pool.resize(static_cast<std::size_t>(n));
  }
  return pool;
}

}  // namespace

std::vector<Hypothesis> beam_search(const CorrectionModel& model,
                                    const TokenSeq& input, int beam, int n,
                                    int max_len) {
  const CorrectionModel* ptr = &model;
  return beam_search_impl({&ptr, 1}, input, beam, n, max_len);
}

std::vector<Hypothesis> ensemble_beam_search(
    std::span<const CorrectionModel* const> models, const TokenSeq& input,
    int beam, int n, int max_len) {
  return beam_search_impl(models, input, beam, n, max_len);
}

double ensemble_sequence_log_prob(
    std::span<const CorrectionModel* const> models, const TokenSeq& input,
    const TokenSeq& output) {
  check_ensemble(models);
  const CorrectionModel& head = *models.front();
  const Vocabulary& vocab = head.vocab();

  TokenIds src_ids = vocab.encode(input);
  if (src_ids.empty()) throw EmptyInputError("sequence_log_prob: empty input");
  TokenIds out_ids = vocab.encode(output);
  if (head.config().direction == Direction::kRightToLeft) {
    std::reverse(out_ids.begin(), out_ids.end());
  }

  std::vector<EncodedSource> sources;
  std::vector<DecoderState> states;
  for (const CorrectionModel* m : models) {
    sources.push_back(encode_source(*m, src_ids));
    states.push_back({sources.back().s0});
  }

  double log_prob = 0.0;
  TokenId prev = Vocabulary::kBos;
  for (std::size_t t = 0; t <= out_ids.size(); ++t) {
    VectorXd probs = ensemble_step(models, sources, states, prev);
    TokenId target =
        t == out_ids.size() ? Vocabulary::kEos : out_ids[t];
    log_prob += std::log(probs(target));
    prev = target;
  }
  return log_prob;
}

double sequence_log_prob(const CorrectionModel& model, const TokenSeq& input,
                         const TokenSeq& output) {
  const CorrectionModel* ptr = &model;
  return ensemble_sequence_log_prob({&ptr, 1}, input, output);
}

TokenSeq greedy_decode(const CorrectionModel& model, const TokenSeq& input,
                       int max_len) {
  auto hyps = beam_search(model, input, 1, 1, max_len);
  return hyps.front().tokens;
}

}  // namespace fbgec
