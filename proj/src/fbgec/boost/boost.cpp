#include "fbgec/boost/boost.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <sstream>

#include "fbgec/hash.hpp"
#include "fbgec/parallel.hpp"
#include "fbgec/seq2seq/decode.hpp"

namespace fbgec {

namespace {

std::string candidate_key(const TokenSeq& tokens) {
  return join_tokens(tokens, '\x1f');
}

}  // namespace

void BoostConfig::validate() const {
  if (sigma <= 1.0) {
    throw ConfigError("sigma must be > 1.0");
  }
  if (nbest < 1) throw ConfigError("candidate n-best size must be >= 1");
  if (beam < nbest) throw ConfigError("beam must be >= n-best size");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (max_len_margin < 1) throw ConfigError("max_len_margin must be >= 1");
}

bool fluency_boost_condition(const TokenSeq& x_c, const TokenSeq& candidate,
                             const NGramModel& lm, double sigma) {
  if (x_c.empty() || candidate.empty()) {
    throw EmptyInputError("fluency_boost_condition: empty sentence");
  }
  double fc = lm.fluency(x_c).f;
  double fm = lm.fluency(candidate).f;
  return fc / fm >= sigma;
}

// ---- CandidateStore ----

namespace {
constexpr std::string_view kStoreHeader = "fbgec-candidates v1";
}

CandidateStore CandidateStore::create(const std::string& path) {
  CandidateStore store;
  store.path_ = path;
  store.out_ = std::make_shared<std::ofstream>(path, std::ios::binary);
  if (!*store.out_) throw IoError("cannot write candidate store: " + path);
  *store.out_ << kStoreHeader << '\n';
  return store;
}

void CandidateStore::append(const TokenSeq& owner, int epoch,
                            const std::string& strategy, double f_ratio,
                            const TokenSeq& member) {
  std::ostringstream line;
  line << to_hex(hash_tokens(owner)) << '\t' << epoch << '\t' << strategy
       << '\t' << std::setprecision(17) << f_ratio << '\t'
       << join_tokens(member);
  *out_ << line.str() << '\n';
}

void CandidateStore::flush() {
  out_->flush();
  if (!*out_) throw IoError("failed writing candidate store: " + path_);
}

std::vector<CandidateStore::Record> CandidateStore::read_all(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read candidate store: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kStoreHeader) {
    throw ParseError("bad candidate store header: " + path, 1);
  }
  std::vector<Record> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Record r;
    std::size_t pos = 0;
    auto next_field = [&](bool last) {
      std::size_t tab = last ? std::string::npos : line.find('\t', pos);
      std::string field = tab == std::string::npos
                              ? line.substr(pos)
                              : line.substr(pos, tab - pos);
      pos = tab == std::string::npos ? line.size() : tab + 1;
      return field;
    };
    r.owner_hash = next_field(false);
    try {
      r.epoch = std::stoi(next_field(false));
      r.strategy = next_field(false);
      r.f_ratio = std::stod(next_field(false));
    } catch (const std::exception&) {
      throw ParseError("bad candidate store record", line_no);
    }
    r.member = split_tokens(next_field(true));
    records.push_back(std::move(r));
  }
  return records;
}

// ---- DisfluencyCandidateSet ----

DisfluencyCandidateSet::DisfluencyCandidateSet(TokenSeq owner,
                                               std::string strategy)
    : owner_(std::move(owner)), strategy_(std::move(strategy)) {}

bool DisfluencyCandidateSet::contains(const TokenSeq& candidate) const {
  return keys_.count(candidate_key(candidate)) > 0;
}

bool DisfluencyCandidateSet::insert(const TokenSeq& member, double f_ratio,
                                    int epoch, CandidateStore* store) {
  if (member.empty() || member == owner_) return false;
  auto [it, inserted] = keys_.emplace(candidate_key(member));
  if (!inserted) return false;
  members_.push_back(member);
  if (store) store->append(owner_, epoch, strategy_, f_ratio, member);
  return true;
}

// ---- candidate generation ----

namespace {

struct ScoredCandidate {
  TokenSeq tokens;
  double f_ratio;
};

// n-best outputs of `model` on `input`, filtered by the sigma condition
// against x_c. Pure; safe to run concurrently across sentences.
std::vector<ScoredCandidate> filtered_nbest(const CorrectionModel& model,
                                            const TokenSeq& input,
                                            const TokenSeq& x_c,
                                            const BoostConfig& cfg,
                                            const NGramModel& lm) {
  int max_len =
      static_cast<int>(input.size()) + cfg.max_len_margin;
  std::vector<Hypothesis> nbest =
      beam_search(model, input, cfg.beam, cfg.nbest, max_len);
  double fc = lm.fluency(x_c).f;
  std::vector<ScoredCandidate> out;
  for (const Hypothesis& hyp : nbest) {
    if (hyp.tokens.empty() || hyp.tokens == x_c) continue;
    double ratio = fc / lm.fluency(hyp.tokens).f;
    if (ratio >= cfg.sigma) out.push_back({hyp.tokens, ratio});
  }
  return out;
}

void insert_all(DisfluencyCandidateSet& set,
                const std::vector<ScoredCandidate>& candidates, int epoch,
                CandidateStore* store) {
  for (const ScoredCandidate& c : candidates) {
    set.insert(c.tokens, c.f_ratio, epoch, store);
  }
}

}  // namespace

DisfluencyCandidateSet gen_back_candidates(const CorrectionModel& gen,
                                           const TokenSeq& x_c,
                                           const BoostConfig& cfg,
                                           const NGramModel& lm,
                                           CandidateStore* store, int epoch) {
  DisfluencyCandidateSet set(x_c, "back");
  insert_all(set, filtered_nbest(gen, x_c, x_c, cfg, lm), epoch, store);
  return set;
}

void update_self_candidates(const CorrectionModel& crt,
                            const SentencePair& pair,
                            DisfluencyCandidateSet& set,
                            const BoostConfig& cfg, const NGramModel& lm,
                            CandidateStore* store, int epoch) {
  if (!cfg.native_self_candidates && pair.source == pair.target) return;
  insert_all(set, filtered_nbest(crt, pair.source, pair.target, cfg, lm),
             epoch, store);
}

void update_dual_candidates(const CorrectionModel& crt,
                            const CorrectionModel& gen,
                            const SentencePair& pair,
                            DisfluencyCandidateSet& set,
                            const BoostConfig& cfg, const NGramModel& lm,
                            CandidateStore* store, int epoch) {
  if (cfg.native_self_candidates || pair.source != pair.target) {
    insert_all(set, filtered_nbest(crt, pair.source, pair.target, cfg, lm),
               epoch, store);
  }
  insert_all(set, filtered_nbest(gen, pair.target, pair.target, cfg, lm),
             epoch, store);
}

// ---- epoch sampling ----

namespace {

std::vector<std::size_t> draw_epoch_indices(const TrainingPools& pools,
                                            Rng& rng) {
  std::size_t k = std::min(pools.combined_size(), pools.original.size());
  return rng.sample_indices(pools.combined_size(), k);
}

EpochSample assemble_epoch(const TrainingPools& pools,
                           const std::vector<std::size_t>& sampled,
                           const CandidateLookup& lookup, Rng& rng,
                           bool dual) {
  EpochSample out;
  out.sampled = sampled;
  for (std::size_t idx : sampled) {
    const SentencePair& pair = pools.combined_at(idx);
    const DisfluencyCandidateSet* set = lookup(pair, idx);
    if (!set || set->empty()) continue;
    const auto& members = set->members();
    SentencePair boost;
    boost.source = members[rng.next_index(members.size())];
    boost.target = pair.target;
    out.boost_pairs.push_back(std::move(boost));
    if (dual) {
      SentencePair reversed;
      reversed.source = pair.target;
      reversed.target = members[rng.next_index(members.size())];
      out.reversed_pairs.push_back(std::move(reversed));
    }
  }
  return out;
}

}  // namespace

EpochSample sample_epoch(const TrainingPools& pools,
                         const CandidateLookup& lookup, Rng& rng, bool dual) {
  return assemble_epoch(pools, draw_epoch_indices(pools, rng), lookup, rng,
                        dual);
}

// ---- strategy runners ----

std::vector<SentencePair> interchange_pairs(
    std::span<const SentencePair> pairs) {
  std::vector<SentencePair> swapped;
  swapped.reserve(pairs.size());
  for (const SentencePair& p : pairs) {
    SentencePair s;
    s.source = p.target;
    s.target = p.source;
    swapped.push_back(std::move(s));
  }
  return swapped;
}

namespace {

struct RoleSeeds {
  std::uint64_t init_crt, train_crt, init_gen, train_gen, sample;
};

RoleSeeds role_seeds(std::uint64_t seed) {
  return {derive_seed(seed, "init.crt"), derive_seed(seed, "train.crt"),
          derive_seed(seed, "init.gen"), derive_seed(seed, "train.gen"),
          derive_seed(seed, "boost.sample")};
}

ModelConfig with_seed(ModelConfig cfg, std::uint64_t seed) {
  cfg.seed = seed;
  return cfg;
}

double dev_loss(const CorrectionModel& model,
                const std::vector<SentencePair>& dev) {
  double nll = 0.0;
  std::size_t tokens = 0;
  for (const SentencePair& pair : dev) {
    TokenIds src = model.vocab().encode(pair.source);
    TokenIds tgt = decoder_target_ids(model, pair.target);
    LossResult r = pair_loss_and_grad(model, src, tgt, nullptr, 0.0, nullptr);
    nll += r.nll_sum;
    tokens += r.tokens;
  }
  return nll / static_cast<double>(tokens);
}

void epoch_schedule(Trainer& trainer, const CorrectionModel& model,
                    const std::vector<SentencePair>* dev) {
  if (dev && !dev->empty()) trainer.observe_dev_loss(dev_loss(model, *dev));
}

// Candidate map shared by the strategies; keyed by the owner sentence.
class CandidateMap {
 public:
  explicit CandidateMap(std::string strategy)
      : strategy_(std::move(strategy)) {}

  DisfluencyCandidateSet& at_owner(const TokenSeq& owner) {
    auto key = candidate_key(owner);
    auto it = sets_.find(key);
    if (it == sets_.end()) {
      it = sets_.emplace(key, DisfluencyCandidateSet(owner, strategy_)).first;
    }
    return it->second;
  }

  const DisfluencyCandidateSet* find_owner(const TokenSeq& owner) const {
    auto it = sets_.find(candidate_key(owner));
    return it == sets_.end() ? nullptr : &it->second;
  }

 private:
  std::string strategy_;
  std::unordered_map<std::string, DisfluencyCandidateSet> sets_;
};

std::vector<SentencePair> concat_pairs(const std::vector<SentencePair>& a,
                                       const std::vector<SentencePair>& b) {
  std::vector<SentencePair> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

void check_nonempty(const std::vector<SentencePair>& s_star) {
  if (s_star.empty()) {
    throw EmptyCorpusError("boost learning needs a non-empty S*");
  }
}

}  // namespace

CorrectionModel train_plain(const std::vector<SentencePair>& s_star,
                            const StrategyOptions& options,
                            std::shared_ptr<const Vocabulary> vocab,
                            const std::vector<SentencePair>* dev,
                            const EpochLogger& log) {
  check_nonempty(s_star);
  options.boost.validate();
  RoleSeeds seeds = role_seeds(options.boost.seed);
  CorrectionModel crt = CorrectionModel::init(
      with_seed(options.model, seeds.init_crt), std::move(vocab));
  Trainer trainer(options.train, seeds.train_crt);
  for (int epoch = 1; epoch <= options.boost.epochs; ++epoch) {
    double loss = trainer.run_epoch(crt, s_star);
    epoch_schedule(trainer, crt, dev);
    if (log) log({epoch, loss, 0.0, 0, 0, s_star.size()});
  }
  return crt;
}

CorrectionModel run_back_boost(const std::vector<SentencePair>& s_star,
                               const std::vector<SentencePair>& native,
                               const StrategyOptions& options,
                               const NGramModel& lm,
                               std::shared_ptr<const Vocabulary> vocab,
                               CandidateStore* store,
                               const std::vector<SentencePair>* dev,
                               const EpochLogger& log) {
  check_nonempty(s_star);
  options.boost.validate();
  RoleSeeds seeds = role_seeds(options.boost.seed);
  TrainingPools pools{s_star, native};

  // Train the error generation model on the interchanged pairs.
  CorrectionModel gen =
      CorrectionModel::init(with_seed(options.model, seeds.init_gen), vocab);
  {
    std::vector<SentencePair> swapped = interchange_pairs(s_star);
    Trainer gen_trainer(options.train, seeds.train_gen);
    for (int epoch = 1; epoch <= options.boost.generator_epochs(); ++epoch) {
      gen_trainer.run_epoch(gen, swapped);
    }
  }

  // Precompute D_back for every correct sentence in S = S* ∪ C.
  CandidateMap candidates("back");
  {
    std::size_t n = pools.combined_size();
    std::vector<std::vector<ScoredCandidate>> found(n);
    parallel_for(n, options.jobs, [&](std::size_t i) {
      const SentencePair& pair = pools.combined_at(i);
      found[i] = filtered_nbest(gen, pair.target, pair.target, options.boost,
                                lm);
    });
    for (std::size_t i = 0; i < n; ++i) {
      DisfluencyCandidateSet& set =
          candidates.at_owner(pools.combined_at(i).target);
      insert_all(set, found[i], 0, store);
    }
    if (store) store->flush();
  }

  CorrectionModel crt =
      CorrectionModel::init(with_seed(options.model, seeds.init_crt), vocab);
  Trainer trainer(options.train, seeds.train_crt);
  Rng sample_rng(seeds.sample);
  for (int epoch = 1; epoch <= options.boost.epochs; ++epoch) {
    EpochSample sample = sample_epoch(
        pools,
        [&](const SentencePair& pair, std::size_t) {
          return candidates.find_owner(pair.target);
        },
        sample_rng, /*dual=*/false);
    std::vector<SentencePair> epoch_set =
        concat_pairs(s_star, sample.boost_pairs);
    double loss = trainer.run_epoch(crt, epoch_set);
    epoch_schedule(trainer, crt, dev);
    if (log) {
      log({epoch, loss, 0.0, sample.boost_pairs.size(), 0, epoch_set.size()});
    }
  }
  return crt;
}

namespace {

// Shared epoch skeleton for self- and dual-boost: train first, then sample
// with on-the-fly candidate updates.
template <typename UpdateFn>
EpochSample generate_with_updates(const TrainingPools& pools,
                                  const BoostConfig& cfg, Rng& rng, bool dual,
                                  CandidateMap& candidates,
                                  CandidateStore* store, int epoch,
                                  std::size_t jobs, UpdateFn&& precompute) {
  std::vector<std::size_t> sampled = draw_epoch_indices(pools, rng);
  (void)cfg;
  // Parallel phase: run the expensive n-best generation against frozen
  // models, one slot per sampled element.
  std::vector<std::vector<ScoredCandidate>> found(sampled.size());
  parallel_for(sampled.size(), jobs, [&](std::size_t i) {
    found[i] = precompute(pools.combined_at(sampled[i]));
  });
  // Serial phase: insert in sampled order, then draw the epoch pairs.
  std::size_t cursor = 0;
  return assemble_epoch(
      pools, sampled,
      [&](const SentencePair& pair, std::size_t) {
        DisfluencyCandidateSet& set = candidates.at_owner(pair.target);
        insert_all(set, found[cursor++], epoch, store);
        return &set;
      },
      rng, dual);
}

}  // namespace

CorrectionModel run_self_boost(const std::vector<SentencePair>& s_star,
                               const std::vector<SentencePair>& native,
                               const StrategyOptions& options,
                               const NGramModel& lm,
                               std::shared_ptr<const Vocabulary> vocab,
                               CandidateStore* store,
                               const std::vector<SentencePair>* dev,
                               const EpochLogger& log) {
  check_nonempty(s_star);
  options.boost.validate();
  RoleSeeds seeds = role_seeds(options.boost.seed);
  TrainingPools pools{s_star, native};
  CandidateMap candidates("self");

  CorrectionModel crt = CorrectionModel::init(
      with_seed(options.model, seeds.init_crt), std::move(vocab));
  Trainer trainer(options.train, seeds.train_crt);
  Rng sample_rng(seeds.sample);

  std::vector<SentencePair> boost_pairs;  // S', empty before the first epoch
  for (int epoch = 1; epoch <= options.boost.epochs; ++epoch) {
    std::vector<SentencePair> epoch_set = concat_pairs(s_star, boost_pairs);
    double loss = trainer.run_epoch(crt, epoch_set);
    epoch_schedule(trainer, crt, dev);

    EpochSample sample = generate_with_updates(
        pools, options.boost, sample_rng, /*dual=*/false, candidates, store,
        epoch, options.jobs, [&](const SentencePair& pair) {
          if (!options.boost.native_self_candidates &&
              pair.source == pair.target) {
            return std::vector<ScoredCandidate>{};
          }
          return filtered_nbest(crt, pair.source, pair.target, options.boost,
                                lm);
        });
    if (store) store->flush();
    boost_pairs = std::move(sample.boost_pairs);
    if (log) {
      log({epoch, loss, 0.0, boost_pairs.size(), 0, epoch_set.size()});
    }
  }
  return crt;
}

std::pair<CorrectionModel, CorrectionModel> run_dual_boost(
    const std::vector<SentencePair>& s_star,
    const std::vector<SentencePair>& native, const StrategyOptions& options,
    const NGramModel& lm, std::shared_ptr<const Vocabulary> vocab,
    CandidateStore* store, const std::vector<SentencePair>* dev,
    const EpochLogger& log) {
  check_nonempty(s_star);
  options.boost.validate();
  RoleSeeds seeds = role_seeds(options.boost.seed);
  TrainingPools pools{s_star, native};
  CandidateMap candidates("dual");

  CorrectionModel crt =
      CorrectionModel::init(with_seed(options.model, seeds.init_crt), vocab);
  CorrectionModel gen =
      CorrectionModel::init(with_seed(options.model, seeds.init_gen), vocab);
  Trainer crt_trainer(options.train, seeds.train_crt);
  Trainer gen_trainer(options.train, seeds.train_gen);
  Rng sample_rng(seeds.sample);

  std::vector<SentencePair> s_tilde = interchange_pairs(s_star);
  std::vector<SentencePair> boost_pairs;     // S'
  std::vector<SentencePair> reversed_pairs;  // S''
  for (int epoch = 1; epoch <= options.boost.epochs; ++epoch) {
    std::vector<SentencePair> crt_set = concat_pairs(s_star, boost_pairs);
    std::vector<SentencePair> gen_set = concat_pairs(s_tilde, reversed_pairs);
    // The two models share no state; their updates may run concurrently.
    double crt_loss = 0.0;
    double gen_loss = 0.0;
    if (options.jobs > 1) {
      auto gen_future = std::async(std::launch::async, [&]() {
        return gen_trainer.run_epoch(gen, gen_set);
      });
      crt_loss = crt_trainer.run_epoch(crt, crt_set);
      gen_loss = gen_future.get();
    } else {
      crt_loss = crt_trainer.run_epoch(crt, crt_set);
      gen_loss = gen_trainer.run_epoch(gen, gen_set);
    }
    epoch_schedule(crt_trainer, crt, dev);

    EpochSample sample = generate_with_updates(
        pools, options.boost, sample_rng, /*dual=*/true, candidates, store,
        epoch, options.jobs, [&](const SentencePair& pair) {
          std::vector<ScoredCandidate> found;
          if (options.boost.native_self_candidates ||
              pair.source != pair.target) {
            found = filtered_nbest(crt, pair.source, pair.target,
                                   options.boost, lm);
          }
          std::vector<ScoredCandidate> from_gen = filtered_nbest(
              gen, pair.target, pair.target, options.boost, lm);
          found.insert(found.end(), from_gen.begin(), from_gen.end());
          return found;
        });
    if (store) store->flush();
    boost_pairs = std::move(sample.boost_pairs);
    reversed_pairs = std::move(sample.reversed_pairs);
    if (log) {
      log({epoch, crt_loss, gen_loss, boost_pairs.size(),
           reversed_pairs.size(), crt_set.size()});
    }
  }
  return {std::move(crt), std::move(gen)};
}

}  // namespace fbgec
