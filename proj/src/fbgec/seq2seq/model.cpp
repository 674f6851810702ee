#include "fbgec/seq2seq/model.hpp"

#include <cmath>

namespace fbgec {

void ModelConfig::validate() const {
  if (embed_dim < 1 || hidden_dim < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "model dimensions must be >= 1");
  }
  if (dropout < 0.0 || dropout >= 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "dropout must lie in [0,1)");
  }
}

void ParamSet::set_zero() {
  visit([](const std::string&, auto& m) { m.setZero(); });
}

std::size_t ParamSet::count() const {
  std::size_t total = 0;
  const_cast<ParamSet*>(this)->visit(
      [&](const std::string&, auto& m) { total += static_cast<std::size_t>(m.size()); });
  return total;
}

bool ParamSet::all_finite() const {
  bool ok = true;
  const_cast<ParamSet*>(this)->visit(
      [&](const std::string&, auto& m) { ok = ok && m.allFinite(); });
  return ok;
}

namespace {

GruParams make_gru(int input_dim, int hidden_dim) {
  GruParams p;
  p.wr = MatrixXd::Zero(hidden_dim, input_dim);
  p.wz = MatrixXd::Zero(hidden_dim, input_dim);
  p.wn = MatrixXd::Zero(hidden_dim, input_dim);
  p.ur = MatrixXd::Zero(hidden_dim, hidden_dim);
  p.uz = MatrixXd::Zero(hidden_dim, hidden_dim);
  p.un = MatrixXd::Zero(hidden_dim, hidden_dim);
  p.br = VectorXd::Zero(hidden_dim);
  p.bz = VectorXd::Zero(hidden_dim);
  p.bn = VectorXd::Zero(hidden_dim);
  return p;
}

}  // namespace

CorrectionModel::CorrectionModel(ModelConfig config,
                                 std::shared_ptr<const Vocabulary> vocab)
    : config_(config), vocab_(std::move(vocab)) {
  config_.validate();
  if (!vocab_) {
    throw Error(ErrorCode::kInvalidArgument, "model requires a vocabulary");
  }
  const int V = static_cast<int>(vocab_->size());
  const int E = config_.embed_dim;
  const int H = config_.hidden_dim;
  params_.embedding = MatrixXd::Zero(V, E);
  params_.enc_fwd = make_gru(E, H);
  params_.enc_bwd = make_gru(E, H);
  params_.dec = make_gru(E, H);
  params_.w_att = MatrixXd::Zero(H, 2 * H);
  params_.w_init = MatrixXd::Zero(H, 2 * H);
  params_.b_init = VectorXd::Zero(H);
  params_.w_read_state = MatrixXd::Zero(E, H);
  params_.w_read_ctx = MatrixXd::Zero(E, H);
  params_.b_read = VectorXd::Zero(E);
  params_.w_logit = MatrixXd::Zero(V, E);
  params_.b_logit = VectorXd::Zero(V);
}

CorrectionModel CorrectionModel::init(ModelConfig config,
                                      std::shared_ptr<const Vocabulary> vocab) {
  CorrectionModel model(config, std::move(vocab));
  Rng rng(derive_seed(config.seed, "model.init"));
  model.params_.visit([&](const std::string&, auto& m) {
    using T = std::decay_t<decltype(m)>;
    if constexpr (std::is_same_v<T, VectorXd>) {
      m.setZero();  // biases start at zero
    } else {
      // Uniform init scaled by fan-in.
      double scale = 1.0 / std::sqrt(static_cast<double>(m.cols()));
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
          m(i, j) = rng.next_range(-scale, scale);
        }
      }
    }
  });
  return model;
}

VectorXd gru_step(const GruParams& p, const VectorXd& x, const VectorXd& h) {
  VectorXd r = ((p.wr * x + p.ur * h + p.br).array() * -1.0).exp();
  r = (1.0 + r.array()).inverse();
  VectorXd z = ((p.wz * x + p.uz * h + p.bz).array() * -1.0).exp();
  z = (1.0 + z.array()).inverse();
  VectorXd u = p.un * h;
  VectorXd n = (p.wn * x + (r.array() * u.array()).matrix() + p.bn)
                   .array()
                   .tanh();
  return ((1.0 - z.array()) * n.array() + z.array() * h.array()).matrix();
}

EncodedSource encode_source(const CorrectionModel& model,
                            std::span<const TokenId> source_ids) {
  if (source_ids.empty()) {
    throw EmptyInputError("encode_source: empty source");
  }
  const ParamSet& p = model.params();
  const int H = model.config().hidden_dim;
  const auto M = static_cast<Eigen::Index>(source_ids.size());

  MatrixXd annotations(2 * H, M);
  VectorXd h = VectorXd::Zero(H);
  for (Eigen::Index t = 0; t < M; ++t) {
    VectorXd x = p.embedding.row(source_ids[static_cast<std::size_t>(t)])
                     .transpose();
    h = gru_step(p.enc_fwd, x, h);
    annotations.block(0, t, H, 1) = h;
  }
  VectorXd hb = VectorXd::Zero(H);
  for (Eigen::Index t = M - 1; t >= 0; --t) {
    VectorXd x = p.embedding.row(source_ids[static_cast<std::size_t>(t)])
                     .transpose();
    hb = gru_step(p.enc_bwd, x, hb);
    annotations.block(H, t, H, 1) = hb;
  }

  EncodedSource out;
  out.projected = p.w_att * annotations;
  VectorXd summary(2 * H);
  summary.head(H) = annotations.block(0, M - 1, H, 1);
  summary.tail(H) = annotations.block(H, 0, H, 1);
  out.s0 = (p.w_init * summary + p.b_init).array().tanh();
  return out;
}

VectorXd decode_step(const CorrectionModel& model, const EncodedSource& src,
                     DecoderState& state, TokenId prev) {
  const ParamSet& p = model.params();
  VectorXd e = p.embedding.row(prev).transpose();
  state.s = gru_step(p.dec, e, state.s);

  VectorXd scores = src.projected.transpose() * state.s;
  scores.array() -= scores.maxCoeff();
  VectorXd alpha = scores.array().exp();
  alpha /= alpha.sum();
  VectorXd context = src.projected * alpha;

  VectorXd readout =
      (p.w_read_state * state.s + p.w_read_ctx * context + p.b_read)
          .array()
          .tanh();
  VectorXd logits = p.w_logit * readout + p.b_logit;
  logits(Vocabulary::kPad) = -1e30;
  logits(Vocabulary::kBos) = -1e30;
  logits.array() -= logits.maxCoeff();
  VectorXd probs = logits.array().exp();
  probs /= probs.sum();
  return probs;
}

}  // namespace fbgec
