#include "fbgec/seq2seq/train.hpp"

#include <algorithm>
#include <cmath>

namespace fbgec {

namespace {

VectorXd sigmoid(const VectorXd& v) {
  return (1.0 + (-v.array()).exp()).inverse().matrix();
}

struct GruCache {
  VectorXd x, h_prev, r, z, n, u;  // u = Un * h_prev
};

VectorXd gru_forward_cached(const GruParams& p, const VectorXd& x,
                            const VectorXd& h_prev, GruCache& cache) {
  cache.x = x;
  cache.h_prev = h_prev;
  cache.r = sigmoid(p.wr * x + p.ur * h_prev + p.br);
  cache.z = sigmoid(p.wz * x + p.uz * h_prev + p.bz);
  cache.u = p.un * h_prev;
  cache.n = (p.wn * x + (cache.r.array() * cache.u.array()).matrix() + p.bn)
                .array()
                .tanh();
  return ((1.0 - cache.z.array()) * cache.n.array() +
          cache.z.array() * cache.h_prev.array())
      .matrix();
}

// Accumulates parameter gradients into gp, returns dL/dx, adds dL/dh_prev
// into dh_prev_out.
VectorXd gru_backward(const GruParams& p, GruParams& gp, const GruCache& c,
                      const VectorXd& dh, VectorXd& dh_prev_out) {
  VectorXd dz = (dh.array() * (c.h_prev - c.n).array()).matrix();
  VectorXd dn = (dh.array() * (1.0 - c.z.array())).matrix();
  VectorXd dh_prev = (dh.array() * c.z.array()).matrix();

  VectorXd dn_pre = (dn.array() * (1.0 - c.n.array().square())).matrix();
  gp.wn.noalias() += dn_pre * c.x.transpose();
  gp.bn += dn_pre;
  VectorXd dr = (dn_pre.array() * c.u.array()).matrix();
  VectorXd du = (dn_pre.array() * c.r.array()).matrix();
  gp.un.noalias() += du * c.h_prev.transpose();
  dh_prev.noalias() += p.un.transpose() * du;

  VectorXd dz_pre =
      (dz.array() * c.z.array() * (1.0 - c.z.array())).matrix();
  gp.wz.noalias() += dz_pre * c.x.transpose();
  gp.uz.noalias() += dz_pre * c.h_prev.transpose();
  gp.bz += dz_pre;
  dh_prev.noalias() += p.uz.transpose() * dz_pre;

  VectorXd dr_pre =
      (dr.array() * c.r.array() * (1.0 - c.r.array())).matrix();
  gp.wr.noalias() += dr_pre * c.x.transpose();
  gp.ur.noalias() += dr_pre * c.h_prev.transpose();
  gp.br += dr_pre;
  dh_prev.noalias() += p.ur.transpose() * dr_pre;

  dh_prev_out += dh_prev;
  return p.wn.transpose() * dn_pre + p.wz.transpose() * dz_pre +
         p.wr.transpose() * dr_pre;
}

VectorXd dropout_mask(Eigen::Index n, double rate, Rng* rng) {
  if (!rng || rate <= 0.0) return VectorXd::Ones(n);
  VectorXd mask(n);
  double keep = 1.0 - rate;
  for (Eigen::Index i = 0; i < n; ++i) {
    mask(i) = rng->next_double() < keep ? 1.0 / keep : 0.0;
  }
  return mask;
}

struct DecStepCache {
  GruCache gru;
  VectorXd s;         // state after this step
  VectorXd alpha;     // attention weights
  VectorXd context;   // projected-annotation mixture
  VectorXd readout;   // post-tanh, pre-dropout
  VectorXd read_mask;
  VectorXd probs;     // full softmax (unmasked)
  VectorXd e;         // dropped input embedding
  VectorXd e_mask;
  TokenId input = 0;
  TokenId target = 0;
};

}  // namespace

TokenIds decoder_target_ids(const CorrectionModel& model,
                            const TokenSeq& target) {
  TokenIds ids = model.vocab().encode(target);
  if (model.config().direction == Direction::kRightToLeft) {
    std::reverse(ids.begin(), ids.end());
  }
  return ids;
}

LossResult pair_loss_and_grad(const CorrectionModel& model,
                              std::span<const TokenId> source_ids,
                              std::span<const TokenId> target_ids,
                              ParamSet* grads, double dropout,
                              Rng* dropout_rng) {
  if (source_ids.empty()) throw EmptyInputError("empty source sequence");
  if (target_ids.empty()) throw EmptyInputError("empty target sequence");

  const ParamSet& p = model.params();
  const int H = model.config().hidden_dim;
  const auto M = static_cast<Eigen::Index>(source_ids.size());

  // ---- encoder forward ----
  std::vector<GruCache> fwd_cache(static_cast<std::size_t>(M));
  std::vector<GruCache> bwd_cache(static_cast<std::size_t>(M));
  std::vector<VectorXd> src_emb(static_cast<std::size_t>(M));
  std::vector<VectorXd> src_mask(static_cast<std::size_t>(M));
  for (Eigen::Index t = 0; t < M; ++t) {
    std::size_t ti = static_cast<std::size_t>(t);
    VectorXd x = p.embedding.row(source_ids[ti]).transpose();
    src_mask[ti] = dropout_mask(x.size(), dropout, dropout_rng);
    src_emb[ti] = (x.array() * src_mask[ti].array()).matrix();
  }
  MatrixXd annotations(2 * H, M);
  VectorXd h = VectorXd::Zero(H);
  for (Eigen::Index t = 0; t < M; ++t) {
    std::size_t ti = static_cast<std::size_t>(t);
    h = gru_forward_cached(p.enc_fwd, src_emb[ti], h, fwd_cache[ti]);
    annotations.block(0, t, H, 1) = h;
  }
  VectorXd hb = VectorXd::Zero(H);
  for (Eigen::Index t = M - 1; t >= 0; --t) {
    std::size_t ti = static_cast<std::size_t>(t);
    hb = gru_forward_cached(p.enc_bwd, src_emb[ti], hb, bwd_cache[ti]);
    annotations.block(H, t, H, 1) = hb;
  }
  MatrixXd projected = p.w_att * annotations;  // H x M

  VectorXd summary(2 * H);
  summary.head(H) = annotations.block(0, M - 1, H, 1);
  summary.tail(H) = annotations.block(H, 0, H, 1);
  VectorXd s0 = (p.w_init * summary + p.b_init).array().tanh();

  // ---- decoder forward ----
  const std::size_t T = target_ids.size() + 1;  // EOS is the final target
  std::vector<DecStepCache> steps(T);
  VectorXd s = s0;
  double nll = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    DecStepCache& c = steps[t];
    c.input = t == 0 ? Vocabulary::kBos : target_ids[t - 1];
    c.target = t + 1 == T ? Vocabulary::kEos : target_ids[t];
    VectorXd e = p.embedding.row(c.input).transpose();
    c.e_mask = dropout_mask(e.size(), dropout, dropout_rng);
    c.e = (e.array() * c.e_mask.array()).matrix();
    c.s = gru_forward_cached(p.dec, c.e, s, c.gru);
    s = c.s;

    VectorXd scores = projected.transpose() * c.s;
    scores.array() -= scores.maxCoeff();
    c.alpha = scores.array().exp();
    c.alpha /= c.alpha.sum();
    c.context = projected * c.alpha;

    c.readout = (p.w_read_state * c.s + p.w_read_ctx * c.context + p.b_read)
                    .array()
                    .tanh();
    c.read_mask = dropout_mask(c.readout.size(), dropout, dropout_rng);
    VectorXd dropped = (c.readout.array() * c.read_mask.array()).matrix();
    VectorXd logits = p.w_logit * dropped + p.b_logit;
    double max_logit = logits.maxCoeff();
    VectorXd shifted = (logits.array() - max_logit).exp();
    double z = shifted.sum();
    c.probs = shifted / z;
    nll += std::log(z) + max_logit - logits(c.target);
  }

  LossResult result{nll, T};
  if (!grads) return result;

  // ---- backward ----
  ParamSet& g = *grads;
  MatrixXd d_projected = MatrixXd::Zero(H, M);
  VectorXd ds_next = VectorXd::Zero(H);  // dL/ds_t carried from step t+1
  for (std::size_t t = T; t-- > 0;) {
    const DecStepCache& c = steps[t];
    VectorXd dlogits = c.probs;
    dlogits(c.target) -= 1.0;
    VectorXd dropped = (c.readout.array() * c.read_mask.array()).matrix();
    g.w_logit.noalias() += dlogits * dropped.transpose();
    g.b_logit += dlogits;
    VectorXd dreadout =
        ((p.w_logit.transpose() * dlogits).array() * c.read_mask.array())
            .matrix();
    VectorXd dread_pre =
        (dreadout.array() * (1.0 - c.readout.array().square())).matrix();
    g.w_read_state.noalias() += dread_pre * c.s.transpose();
    g.w_read_ctx.noalias() += dread_pre * c.context.transpose();
    g.b_read += dread_pre;

    VectorXd ds = p.w_read_state.transpose() * dread_pre + ds_next;
    VectorXd dcontext = p.w_read_ctx.transpose() * dread_pre;

    // context = projected * alpha; scores = projected^T s; alpha = softmax
    VectorXd dalpha = projected.transpose() * dcontext;
    d_projected.noalias() += dcontext * c.alpha.transpose();
    double inner = c.alpha.dot(dalpha);
    VectorXd dscores =
        (c.alpha.array() * (dalpha.array() - inner)).matrix();
    ds.noalias() += projected * dscores;
    d_projected.noalias() += c.s * dscores.transpose();

    ds_next.setZero();
    VectorXd dx = gru_backward(p.dec, g.dec, c.gru, ds, ds_next);
    g.embedding.row(c.input) +=
        (dx.array() * c.e_mask.array()).matrix().transpose();
  }

  // ds_next now holds dL/ds0.
  VectorXd ds0_pre = (ds_next.array() * (1.0 - s0.array().square())).matrix();
  g.w_init.noalias() += ds0_pre * summary.transpose();
  g.b_init += ds0_pre;
  VectorXd dsummary = p.w_init.transpose() * ds0_pre;

  // projected = w_att * annotations
  g.w_att.noalias() += d_projected * annotations.transpose();
  MatrixXd d_annotations = p.w_att.transpose() * d_projected;  // 2H x M
  d_annotations.block(0, M - 1, H, 1) += dsummary.head(H);
  d_annotations.block(H, 0, H, 1) += dsummary.tail(H);

  // forward encoder BPTT (reverse computation order: t = M-1 .. 0)
  VectorXd carry = VectorXd::Zero(H);
  std::vector<VectorXd> d_src(static_cast<std::size_t>(M),
                              VectorXd::Zero(p.embedding.cols()));
  for (Eigen::Index t = M - 1; t >= 0; --t) {
    std::size_t ti = static_cast<std::size_t>(t);
    VectorXd dh = d_annotations.block(0, t, H, 1) + carry;
    carry.setZero();
    d_src[ti] += gru_backward(p.enc_fwd, g.enc_fwd, fwd_cache[ti], dh, carry);
  }
  // backward encoder BPTT (its computation ran t = M-1 .. 0, so reverse is
  // t = 0 .. M-1)
  carry.setZero();
  for (Eigen::Index t = 0; t < M; ++t) {
    std::size_t ti = static_cast<std::size_t>(t);
    VectorXd dh = d_annotations.block(H, t, H, 1) + carry;
    carry.setZero();
    d_src[ti] += gru_backward(p.enc_bwd, g.enc_bwd, bwd_cache[ti], dh, carry);
  }
  for (Eigen::Index t = 0; t < M; ++t) {
    std::size_t ti = static_cast<std::size_t>(t);
    g.embedding.row(source_ids[ti]) +=
        (d_src[ti].array() * src_mask[ti].array()).matrix().transpose();
  }
  return result;
}

double pair_loss(const CorrectionModel& model,
                 std::span<const TokenId> source_ids,
                 std::span<const TokenId> target_ids) {
  return pair_loss_and_grad(model, source_ids, target_ids, nullptr, 0.0,
                            nullptr)
      .nll_sum;
}

Trainer::Trainer(TrainOptions options, std::uint64_t seed)
    : options_(options),
      learning_rate_(options.learning_rate),
      rng_(seed) {}

double Trainer::run_epoch(CorrectionModel& model,
                          std::span<const SentencePair> pairs) {
  if (pairs.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "train_epoch: no pairs");
  }
  const Vocabulary& vocab = model.vocab();

  struct Encoded {
    TokenIds src, tgt;
  };
  std::vector<Encoded> encoded(pairs.size());
  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    encoded[i].src = vocab.encode(pairs[i].source);
    encoded[i].tgt = decoder_target_ids(model, pairs[i].target);
    if (encoded[i].src.empty() || encoded[i].tgt.empty()) {
      throw EmptyInputError("train_epoch: empty sentence in pair");
    }
    order[i] = i;
  }
  rng_.shuffle(order);

  if (!velocity_) {
    velocity_ = model.params();
    velocity_->set_zero();
  }

  ParamSet grads = model.params();
  double total_nll = 0.0;
  std::size_t total_tokens = 0;

  std::size_t i = 0;
  while (i < order.size()) {
    // Token-capped batch (always at least one pair).
    std::size_t batch_end = i;
    std::size_t batch_tokens = 0;
    while (batch_end < order.size()) {
      const Encoded& e = encoded[order[batch_end]];
      std::size_t cost = e.src.size() + e.tgt.size() + 1;
      if (batch_end > i && batch_tokens + cost > options_.max_batch_tokens) {
        break;
      }
      batch_tokens += cost;
      ++batch_end;
    }

    grads.set_zero();
    double batch_nll = 0.0;
    std::size_t batch_targets = 0;
    for (std::size_t b = i; b < batch_end; ++b) {
      const Encoded& e = encoded[order[b]];
      LossResult r = pair_loss_and_grad(model, e.src, e.tgt, &grads,
                                        model.config().dropout, &rng_);
      batch_nll += r.nll_sum;
      batch_targets += r.tokens;
    }
    if (!std::isfinite(batch_nll)) {
      throw DivergedTrainingError("non-finite loss; lower the learning rate");
    }
    total_nll += batch_nll;
    total_tokens += batch_targets;

    // Per-token normalization, then a global-norm clip.
    double inv = 1.0 / static_cast<double>(batch_targets);
    double sq_norm = 0.0;
    grads.visit([&](const std::string&, auto& m) {
      m *= inv;
      sq_norm += m.squaredNorm();
    });
    double norm = std::sqrt(sq_norm);
    if (options_.clip_norm > 0.0 && norm > options_.clip_norm) {
      double scale = options_.clip_norm / norm;
      grads.visit([&](const std::string&, auto& m) { m *= scale; });
    }

    // Nesterov momentum: v = mu v + g; theta -= lr (g + mu v).
    double mu = options_.momentum;
    double lr = learning_rate_;
    ParamSet& v = *velocity_;
    // ParamSet::visit yields members in a fixed order, so paired iteration
    // is safe.
    std::vector<Eigen::Map<Eigen::VectorXd>> theta_views, grad_views, vel_views;
    auto collect = [](ParamSet& set,
                      std::vector<Eigen::Map<Eigen::VectorXd>>& out) {
      set.visit([&](const std::string&, auto& m) {
        out.emplace_back(m.data(), m.size());
      });
    };
    collect(model.params(), theta_views);
    collect(grads, grad_views);
    collect(v, vel_views);
    for (std::size_t k = 0; k < theta_views.size(); ++k) {
      vel_views[k] = mu * vel_views[k] + grad_views[k];
      theta_views[k] -= lr * (grad_views[k] + mu * vel_views[k]);
    }

    if (!model.params().all_finite()) {
      throw DivergedTrainingError(
          "non-finite parameters after update; lower the learning rate");
    }
    model.add_training_steps(1);
    i = batch_end;
  }
  return total_nll / static_cast<double>(total_tokens);
}

void Trainer::observe_dev_loss(double dev_loss) {
  if (best_dev_loss_ &&
      dev_loss > *best_dev_loss_ - options_.min_improvement) {
    learning_rate_ =
        std::max(learning_rate_ * options_.lr_decay, options_.min_learning_rate);
  }
  if (!best_dev_loss_ || dev_loss < *best_dev_loss_) {
    best_dev_loss_ = dev_loss;
  }
}

double grad_check(CorrectionModel& model, const SentencePair& pair,
                  double epsilon, std::size_t coordinates, Rng& rng) {
  if (pair.target.empty() || pair.source.empty()) {
    throw EmptyInputError("grad_check: empty sentence in pair");
  }
  TokenIds src = model.vocab().encode(pair.source);
  TokenIds tgt = decoder_target_ids(model, pair.target);

  ParamSet grads = model.params();
  grads.set_zero();
  pair_loss_and_grad(model, src, tgt, &grads, 0.0, nullptr);

  // Collect flat views over parameters and their analytic gradients.
  std::vector<Eigen::Map<Eigen::VectorXd>> theta, analytic;
  model.params().visit([&](const std::string&, auto& m) {
    theta.emplace_back(m.data(), m.size());
  });
  grads.visit([&](const std::string&, auto& m) {
    analytic.emplace_back(m.data(), m.size());
  });
  std::size_t total = 0;
  for (const auto& view : theta) total += static_cast<std::size_t>(view.size());

  double max_rel = 0.0;
  for (std::size_t c = 0; c < coordinates; ++c) {
    std::size_t flat = rng.next_index(total);
    std::size_t block = 0;
    while (flat >= static_cast<std::size_t>(theta[block].size())) {
      flat -= static_cast<std::size_t>(theta[block].size());
      ++block;
    }
    double saved = theta[block](static_cast<Eigen::Index>(flat));
    theta[block](static_cast<Eigen::Index>(flat)) = saved + epsilon;
    double plus = pair_loss(model, src, tgt);
    theta[block](static_cast<Eigen::Index>(flat)) = saved - epsilon;
    double minus = pair_loss(model, src, tgt);
    theta[block](static_cast<Eigen::Index>(flat)) = saved;

    double numeric = (plus - minus) / (2.0 * epsilon);
    double a = analytic[block](static_cast<Eigen::Index>(flat));
    double denom = std::max(std::abs(a) + std::abs(numeric), 1e-8);
    max_rel = std::max(max_rel, std::abs(a - numeric) / denom);
  }
  return max_rel;
}

}  // namespace fbgec
