#include "fbgec/infer/infer.hpp"

#include "fbgec/metrics/edits.hpp"

namespace fbgec {

void InferenceConfig::validate() const {
  if (nbest < 1) throw ConfigError("n-best must be >= 1");
  if (beam < nbest) throw ConfigError("beam must be >= n-best");
  if (max_rounds < 1) throw ConfigError("max rounds must be >= 1");
  if (max_len_margin < 1) throw ConfigError("max_len_margin must be >= 1");
}

ModelNBestSource::ModelNBestSource(std::vector<const CorrectionModel*> models)
    : models_(std::move(models)) {
  if (models_.empty()) {
    throw EnsembleMismatchError("inference needs at least one model");
  }
}

std::vector<Hypothesis> ModelNBestSource::nbest(const TokenSeq& input,
                                                int beam, int n,
                                                int max_len) const {
  return ensemble_beam_search(models_, input, beam, n, max_len);
}

Direction ModelNBestSource::direction() const {
  return models_.front()->config().direction;
}

TokenSeq rerank(std::span<const Hypothesis> nbest, const TokenSeq& source,
                const NGramModel& lm, const RerankWeights& weights) {
  if (nbest.empty()) throw EmptyInputError("rerank: empty n-best list");
  std::size_t best = 0;
  double best_score = 0.0;
  for (std::size_t i = 0; i < nbest.size(); ++i) {
    const Hypothesis& hyp = nbest[i];
    double fluency =
        hyp.tokens.empty() ? 0.0 : lm.fluency(hyp.tokens).f;
    double score = weights.model_score * hyp.normalized_score() +
                   weights.fluency * fluency -
                   weights.edit * static_cast<double>(levenshtein_distance(
                                      source, hyp.tokens));
    if (i == 0 || score > best_score) {
      best = i;
      best_score = score;
    }
  }
  return nbest[best].tokens;
}

TokenSeq correct_single(const NBestSource& source, const TokenSeq& x,
                        const InferenceConfig& cfg, const NGramModel& lm) {
  cfg.validate();
  if (x.empty()) throw EmptyInputError("correct_single: empty sentence");
  int max_len = static_cast<int>(x.size()) + cfg.max_len_margin;
  std::vector<Hypothesis> nbest = source.nbest(x, cfg.beam, cfg.nbest, max_len);
  return rerank(nbest, x, lm, cfg.weights);
}

namespace {

// One guarded refinement pass; appends a trace step and returns the
// accepted sentence (the input when the proposal does not improve fluency).
TokenSeq guarded_round(const NBestSource& source, const TokenSeq& current,
                       int round, const std::string& stage,
                       const InferenceConfig& cfg, const NGramModel& lm,
                       CorrectionTrace& trace, bool guarded, bool* accepted) {
  TokenSeq proposal = correct_single(source, current, cfg, lm);
  double f_before = lm.fluency(current).f;
  double f_after = proposal.empty() ? 0.0 : lm.fluency(proposal).f;
  bool improve = proposal != current && f_after > f_before;
  bool accept = guarded ? improve : (proposal != current);
  trace.push_back(
      {round, stage, current, proposal, f_before, f_after, accept});
  if (accepted) *accepted = accept;
  return accept ? proposal : current;
}

}  // namespace

std::pair<TokenSeq, CorrectionTrace> correct_multi_round(
    const NBestSource& source, const TokenSeq& x, const InferenceConfig& cfg,
    const NGramModel& lm, const std::string& stage_tag) {
  cfg.validate();
  CorrectionTrace trace;
  TokenSeq current = x;
  for (int round = 1; round <= cfg.max_rounds; ++round) {
    bool accepted = false;
    current = guarded_round(source, current, round, stage_tag, cfg, lm, trace,
                            /*guarded=*/true, &accepted);
    if (!accepted) break;
  }
  return {current, trace};
}

std::pair<TokenSeq, CorrectionTrace> correct_round_way(
    const NBestSource& r2l, const NBestSource& l2r, const TokenSeq& x,
    const InferenceConfig& cfg, const NGramModel& lm) {
  cfg.validate();
  if (r2l.direction() != Direction::kRightToLeft) {
    throw DirectionError("round-way stage 1 requires a right-to-left model");
  }
  if (l2r.direction() != Direction::kLeftToRight) {
    throw DirectionError("round-way stage 2 requires a left-to-right model");
  }

  CorrectionTrace trace;
  TokenSeq current = x;
  auto run_stage = [&](const NBestSource& source, const std::string& tag,
                       int round_base) {
    if (cfg.multiround_stages) {
      auto [result, stage_trace] =
          correct_multi_round(source, current, cfg, lm, tag);
      for (TraceStep step : stage_trace) {
        step.round += round_base;
        trace.push_back(std::move(step));
      }
      current = result;
    } else {
      current = guarded_round(source, current, round_base + 1, tag, cfg, lm,
                              trace, cfg.guarded_roundway, nullptr);
    }
  };
  run_stage(r2l, "r2l", 0);
  int base = static_cast<int>(trace.size());
  run_stage(l2r, "l2r", base);
  return {current, trace};
}

}  // namespace fbgec
