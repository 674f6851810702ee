#pragma once

#include <Eigen/Core>
#include <memory>

#include "fbgec/rng.hpp"
#include "fbgec/text/vocabulary.hpp"

namespace fbgec {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Direction { kLeftToRight, kRightToLeft };

inline const char* to_string(Direction d) {
  return d == Direction::kLeftToRight ? "l2r" : "r2l";
}

struct ModelConfig {
  int embed_dim = 32;
  int hidden_dim = 64;
  Direction direction = Direction::kLeftToRight;
  double dropout = 0.2;
  std::uint64_t seed = 1;

  void validate() const;
};

// One GRU cell. Input dimension is the embedding size for both the encoder
// and the decoder.
struct GruParams {
  MatrixXd wr, wz, wn;  // H x in
  MatrixXd ur, uz, un;  // H x H
  VectorXd br, bz, bn;  // H

  template <typename F>
  void visit(const std::string& prefix, F&& f) {
    f(prefix + ".wr", wr);
    f(prefix + ".wz", wz);
    f(prefix + ".wn", wn);
    f(prefix + ".ur", ur);
    f(prefix + ".uz", uz);
    f(prefix + ".un", un);
    f(prefix + ".br", br);
    f(prefix + ".bz", bz);
    f(prefix + ".bn", bn);
  }
};

// All trainable tensors. Gradient buffers reuse the same struct so the
// optimizer, the checkpoint format and the finite-difference checker all
// walk one registry.
struct ParamSet {
  MatrixXd embedding;  // V x E, shared by encoder and decoder
  GruParams enc_fwd, enc_bwd, dec;
  MatrixXd w_att;                    // H x 2H, annotation projection
  MatrixXd w_init;                   // H x 2H
  VectorXd b_init;                   // H
  MatrixXd w_read_state, w_read_ctx; // E x H
  VectorXd b_read;                   // E
  MatrixXd w_logit;                  // V x E
  VectorXd b_logit;                  // V

  template <typename F>
  void visit(F&& f) {
    f("embedding", embedding);
    enc_fwd.visit("enc_fwd", f);
    enc_bwd.visit("enc_bwd", f);
    dec.visit("dec", f);
    f("w_att", w_att);
    f("w_init", w_init);
    f("b_init", b_init);
    f("w_read_state", w_read_state);
    f("w_read_ctx", w_read_ctx);
    f("b_read", b_read);
    f("w_logit", w_logit);
    f("b_logit", b_logit);
  }

  void set_zero();
  std::size_t count() const;
  bool all_finite() const;
};

// Bidirectional GRU encoder with a single-layer GRU decoder and dot-product
// attention over projected annotations.
class CorrectionModel {
 public:
  CorrectionModel(ModelConfig config, std::shared_ptr<const Vocabulary> vocab);

  static CorrectionModel init(ModelConfig config,
                              std::shared_ptr<const Vocabulary> vocab);

  const ModelConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return *vocab_; }
  std::shared_ptr<const Vocabulary> vocab_ptr() const { return vocab_; }

  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  std::uint64_t training_steps() const { return training_steps_; }
  void add_training_steps(std::uint64_t n) { training_steps_ += n; }
  void set_training_steps(std::uint64_t n) { training_steps_ = n; }

  std::size_t parameter_count() const { return params_.count(); }

 private:
  ModelConfig config_;
  std::shared_ptr<const Vocabulary> vocab_;
  ParamSet params_;
  std::uint64_t training_steps_ = 0;
};

// Inference-side forward pieces (no caches, no dropout).

struct EncodedSource {
  MatrixXd projected;  // H x M, w_att applied to the annotations
  VectorXd s0;         // decoder initial state
};

struct DecoderState {
  VectorXd s;
};

VectorXd gru_step(const GruParams& p, const VectorXd& x, const VectorXd& h);

EncodedSource encode_source(const CorrectionModel& model,
                            std::span<const TokenId> source_ids);

// Advances the state by feeding `prev` and returns the next-token
// distribution. PAD and BOS are masked out of every inference distribution.
VectorXd decode_step(const CorrectionModel& model, const EncodedSource& src,
                     DecoderState& state, TokenId prev);

}  // namespace fbgec
