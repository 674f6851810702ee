#include "fbgec/lm/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <ostream>

namespace fbgec {

namespace {

constexpr char kMagic[4] = {'F', 'B', 'L', 'M'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

void write_string(std::ostream& out, const std::string& s) {
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
  auto n = read_pod<std::uint32_t>(in);
  std::string s(n, '\0');
  in.read(s.data(), n);
  return s;
}

}  // namespace

NGramModel NGramModel::train(const std::vector<TokenSeq>& corpus, int order,
                             SmoothingParams smoothing, Vocabulary vocab) {
  if (order < 1) {
    throw EmptyCorpusError("n-gram order must be >= 1");
  }
  if (corpus.empty()) {
    throw EmptyCorpusError("cannot train a language model on no sentences");
  }
  if (smoothing.discount < 0.0 || smoothing.discount >= 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "discount must lie in [0,1)");
  }

  NGramModel model;
  model.order_ = order;
  model.smoothing_ = smoothing;
  model.vocab_ = std::move(vocab);
  model.levels_.resize(static_cast<std::size_t>(order));

  const std::size_t pad = static_cast<std::size_t>(order - 1);
  for (const TokenSeq& sentence : corpus) {
    TokenIds seq(pad, Vocabulary::kBos);
    for (TokenId id : model.vocab_.encode(sentence)) seq.push_back(id);
    seq.push_back(Vocabulary::kEos);
    for (std::size_t pos = pad; pos < seq.size(); ++pos) {
      model.total_tokens_ += 1;
      for (int level = 1; level <= order; ++level) {
        std::size_t ctx_len = static_cast<std::size_t>(level - 1);
        TokenIds context(seq.begin() + static_cast<std::ptrdiff_t>(pos - ctx_len),
                         seq.begin() + static_cast<std::ptrdiff_t>(pos));
        auto& slot = model.levels_[static_cast<std::size_t>(level - 1)]
                         [std::move(context)];
        slot.total += 1;
        slot.counts[seq[pos]] += 1;
      }
    }
  }
  return model;
}

std::size_t NGramModel::predictable_types() const {
  return vocab_.size() - 2;  // everything except PAD and BOS
}

double NGramModel::unigram_prob(TokenId token) const {
  static const TokenIds kEmpty;
  const ContextMap& level = levels_[0];
  auto it = level.find(kEmpty);
  std::uint64_t count = 0;
  if (it != level.end()) {
    auto cit = it->second.counts.find(token);
    if (cit != it->second.counts.end()) count = cit->second;
  }
  double add = smoothing_.add_one_unigram ? 1.0 : 0.0;
  double numerator = static_cast<double>(count) + add;
  double denominator = static_cast<double>(total_tokens_) +
                       add * static_cast<double>(predictable_types());
  return numerator / denominator;
}

double NGramModel::prob_level(TokenId token,
                              std::span<const TokenId> context) const {
  if (context.empty()) return unigram_prob(token);
  const ContextMap& level = levels_[context.size()];
  auto shorter = context.subspan(1);
  auto it = level.find(context);
  if (it == level.end() || it->second.total == 0) {
    return prob_level(token, shorter);
  }
  const ContextCounts& cc = it->second;
  double d = smoothing_.discount;
  std::uint64_t count = 0;
  auto cit = cc.counts.find(token);
  if (cit != cc.counts.end()) count = cit->second;
  double total = static_cast<double>(cc.total);
  double discounted = std::max(static_cast<double>(count) - d, 0.0) / total;
  double backoff_mass =
      d * static_cast<double>(cc.counts.size()) / total;
  return discounted + backoff_mass * prob_level(token, shorter);
}

double NGramModel::prob_id(TokenId token,
                           std::span<const TokenId> context) const {
  std::size_t max_ctx = static_cast<std::size_t>(order_ - 1);
  if (context.size() > max_ctx) {
    context = context.subspan(context.size() - max_ctx);
  }
  return prob_level(token, context);
}

double NGramModel::log_prob(std::string_view token,
                            const TokenSeq& context) const {
  TokenIds ctx = vocab_.encode(context);
  double p = prob_id(vocab_.id(token), ctx);
  return std::log(p);
}

double NGramModel::cross_entropy(const TokenSeq& sentence) const {
  if (sentence.empty()) {
    throw EmptyInputError("cross_entropy: empty sentence");
  }
  const std::size_t pad = static_cast<std::size_t>(order_ - 1);
  TokenIds seq(pad, Vocabulary::kBos);
  for (TokenId id : vocab_.encode(sentence)) seq.push_back(id);
  seq.push_back(Vocabulary::kEos);

  double log_sum = 0.0;
  std::size_t positions = 0;
  for (std::size_t pos = pad; pos < seq.size(); ++pos) {
    std::size_t ctx_len = std::min(pad, pos);
    std::span<const TokenId> context(seq.data() + pos - ctx_len, ctx_len);
    log_sum += std::log(prob_id(seq[pos], context));
    ++positions;
  }
  return -log_sum / static_cast<double>(positions);
}

FluencyScore NGramModel::fluency(const TokenSeq& sentence) const {
  FluencyScore score;
  score.h = cross_entropy(sentence);
  score.f = 1.0 / (1.0 + score.h);
  return score;
}

void NGramModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write language model: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  write_pod<std::int32_t>(out, order_);
  write_pod<double>(out, smoothing_.discount);
  write_pod<std::uint8_t>(out, smoothing_.add_one_unigram ? 1 : 0);
  write_pod<std::uint64_t>(out, total_tokens_);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(vocab_.size()));
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    write_string(out, vocab_.surface(static_cast<TokenId>(i)));
  }
  for (const ContextMap& level : levels_) {
    // Sort contexts so identical models serialize to identical bytes.
    std::vector<const TokenIds*> keys;
    keys.reserve(level.size());
    for (const auto& [key, value] : level) keys.push_back(&key);
    std::sort(keys.begin(), keys.end(),
              [](const TokenIds* a, const TokenIds* b) { return *a < *b; });
    write_pod<std::uint64_t>(out, keys.size());
    for (const TokenIds* key : keys) {
      write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(key->size()));
      for (TokenId id : *key) write_pod<std::int32_t>(out, id);
      const ContextCounts& cc = level.at(*key);
      write_pod<std::uint64_t>(out, cc.total);
      std::vector<std::pair<TokenId, std::uint64_t>> entries(
          cc.counts.begin(), cc.counts.end());
      std::sort(entries.begin(), entries.end());
      write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(entries.size()));
      for (const auto& [token, count] : entries) {
        write_pod<std::int32_t>(out, token);
        write_pod<std::uint64_t>(out, count);
      }
    }
  }
  if (!out) throw IoError("failed writing language model: " + path);
}

NGramModel NGramModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read language model: " + path);
  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("not a language model file: " + path, 0);
  }
  auto version = read_pod<std::uint32_t>(in);
  if (version != kVersion) {
    throw ParseError("unsupported language model version", 0);
  }
  NGramModel model;
  model.order_ = read_pod<std::int32_t>(in);
  model.smoothing_.discount = read_pod<double>(in);
  model.smoothing_.add_one_unigram = read_pod<std::uint8_t>(in) != 0;
  model.total_tokens_ = read_pod<std::uint64_t>(in);
  auto vocab_size = read_pod<std::uint32_t>(in);
  {
    std::vector<std::string> surfaces;
    surfaces.reserve(vocab_size);
    for (std::uint32_t i = 0; i < vocab_size; ++i) {
      surfaces.push_back(read_string(in));
    }
    model.vocab_ = Vocabulary::from_surfaces(std::move(surfaces));
  }
  model.levels_.resize(static_cast<std::size_t>(model.order_));
  for (ContextMap& level : model.levels_) {
    auto num_contexts = read_pod<std::uint64_t>(in);
    for (std::uint64_t c = 0; c < num_contexts; ++c) {
      auto key_len = read_pod<std::uint32_t>(in);
      TokenIds key(key_len);
      for (auto& id : key) id = read_pod<std::int32_t>(in);
      ContextCounts cc;
      cc.total = read_pod<std::uint64_t>(in);
      auto entries = read_pod<std::uint32_t>(in);
      for (std::uint32_t e = 0; e < entries; ++e) {
        TokenId token = read_pod<std::int32_t>(in);
        std::uint64_t count = read_pod<std::uint64_t>(in);
        cc.counts.emplace(token, count);
      }
      level.emplace(std::move(key), std::move(cc));
    }
  }
  if (!in) throw ParseError("truncated language model file: " + path, 0);
  return model;
}

void NGramModel::dump(std::ostream& out) const {
  out << "order " << order_ << " discount " << smoothing_.discount
      << " add_one " << (smoothing_.add_one_unigram ? 1 : 0) << " tokens "
      << total_tokens_ << '\n';
  for (const ContextMap& level : levels_) {
    std::vector<const TokenIds*> keys;
    keys.reserve(level.size());
    for (const auto& [key, value] : level) keys.push_back(&key);
    std::sort(keys.begin(), keys.end(),
              [](const TokenIds* a, const TokenIds* b) { return *a < *b; });
    for (const TokenIds* key : keys) {
      TokenSeq ctx;
      for (TokenId id : *key) ctx.push_back(vocab_.surface(id));
      for (std::size_t id = 0; id < vocab_.size(); ++id) {
        TokenId token = static_cast<TokenId>(id);
        if (token == Vocabulary::kPad || token == Vocabulary::kBos) continue;
        double p = prob_id(token, std::span<const TokenId>(*key));
        out << "p(" << vocab_.surface(token) << " |";
        for (const auto& c : ctx) out << ' ' << c;
        out << " ) = " << p << '\n';
      }
    }
  }
}

}  // namespace fbgec
