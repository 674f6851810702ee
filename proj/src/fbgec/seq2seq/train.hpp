#pragma once

#include <optional>
#include <span>

#include "fbgec/seq2seq/model.hpp"
#include "fbgec/text/corpus.hpp"

namespace fbgec {

struct TrainOptions {
  double learning_rate = 0.05;
  double momentum = 0.99;  // Nesterov
  std::size_t max_batch_tokens = 400;
  double clip_norm = 5.0;
  // Plateau schedule: halve the rate when the observed dev loss stops
  // improving by more than min_improvement.
  double lr_decay = 0.5;
  double min_improvement = 1e-4;
  double min_learning_rate = 1e-4;
};

// Encodes the target side in decode order (reversed for right-to-left
// models). EOS is appended inside the loss, not here.
TokenIds decoder_target_ids(const CorrectionModel& model,
                            const TokenSeq& target);

// Per-pair negative log likelihood (sum over target positions including
// EOS) with gradients accumulated into `grads`. Dropout applies only when a
// mask rng is supplied.
struct LossResult {
  double nll_sum = 0.0;
  std::size_t tokens = 0;
};
LossResult pair_loss_and_grad(const CorrectionModel& model,
                              std::span<const TokenId> source_ids,
                              std::span<const TokenId> target_ids,
                              ParamSet* grads, double dropout,
                              Rng* dropout_rng);

double pair_loss(const CorrectionModel& model,
                 std::span<const TokenId> source_ids,
                 std::span<const TokenId> target_ids);

// Token-batched Nesterov-momentum SGD over one model. The rng stream drives
// batch shuffling and dropout masks; two Trainers with equal seeds and data
// produce bit-identical parameter trajectories.
class Trainer {
 public:
  Trainer(TrainOptions options, std::uint64_t seed);

  // One pass over the pairs; returns the average per-token negative log
  // likelihood. Throws DivergedTrainingError when loss or parameters leave
  // the finite range.
  double run_epoch(CorrectionModel& model, std::span<const SentencePair> pairs);

  // Feeds the plateau schedule.
  void observe_dev_loss(double dev_loss);

  double learning_rate() const { return learning_rate_; }

 private:
  TrainOptions options_;
  double learning_rate_;
  Rng rng_;
  std::optional<ParamSet> velocity_;
  std::optional<double> best_dev_loss_;
};

// Central-difference gradient verification on a random subsample of
// parameter coordinates. Returns the maximum relative error observed.
double grad_check(CorrectionModel& model, const SentencePair& pair,
                  double epsilon, std::size_t coordinates, Rng& rng);

}  // namespace fbgec
