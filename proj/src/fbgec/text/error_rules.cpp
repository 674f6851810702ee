#include "fbgec/text/error_rules.hpp"

#include <algorithm>
#include <array>
#include <fstream>

#include "fbgec/metrics/edits.hpp"

namespace fbgec {

namespace lexicon {

namespace {

constexpr std::array kVerbs = {
    Verb{"come", "comes", "coming"},    Verb{"see", "sees", "seeing"},
    Verb{"like", "likes", "liking"},    Verb{"read", "reads", "reading"},
    Verb{"write", "writes", "writing"}, Verb{"visit", "visits", "visiting"},
    Verb{"find", "finds", "finding"},   Verb{"play", "plays", "playing"},
    Verb{"watch", "watches", "watching"},
    Verb{"sing", "sings", "singing"},   Verb{"buy", "buys", "buying"},
    Verb{"open", "opens", "opening"},   Verb{"walk", "walks", "walking"},
    Verb{"paint", "paints", "painting"},
};

constexpr std::array kNouns = {
    Noun{"park", "parks"},       Noun{"book", "books"},
    Noun{"dog", "dogs"},         Noun{"car", "cars"},
    Noun{"story", "stories"},    Noun{"house", "houses"},
    Noun{"friend", "friends"},   Noun{"garden", "gardens"},
    Noun{"movie", "movies"},     Noun{"letter", "letters"},
    Noun{"song", "songs"},       Noun{"city", "cities"},
    Noun{"teacher", "teachers"}, Noun{"picture", "pictures"},
    Noun{"table", "tables"},     Noun{"door", "doors"},
};

constexpr std::array kWordForms = {
    WordForm{"quick", "quickly"},     WordForm{"happy", "happily"},
    WordForm{"careful", "carefully"}, WordForm{"quiet", "quietly"},
    WordForm{"slow", "slowly"},       WordForm{"bright", "brightly"},
};

constexpr std::array<std::string_view, 2> kArticles = {"a", "the"};
constexpr std::array<std::string_view, 6> kPrepositions = {"to", "in",   "at",
                                                           "on", "near", "with"};
constexpr std::array<std::string_view, 6> kSingularSubjects = {
    "She", "He", "Tom", "Mary", "John", "Anna"};
constexpr std::array<std::string_view, 2> kPluralSubjects = {"They", "We"};

}  // namespace

std::span<const Verb> verbs() { return kVerbs; }
std::span<const Noun> nouns() { return kNouns; }
std::span<const WordForm> word_forms() { return kWordForms; }
std::span<const std::string_view> articles() { return kArticles; }
std::span<const std::string_view> prepositions() { return kPrepositions; }
std::span<const std::string_view> singular_subjects() {
  return kSingularSubjects;
}
std::span<const std::string_view> plural_subjects() { return kPluralSubjects; }

const Verb* find_verb(std::string_view token) {
  for (const Verb& v : kVerbs) {
    if (token == v.base || token == v.third) return &v;
  }
  return nullptr;
}

const Noun* find_noun(std::string_view token) {
  for (const Noun& n : kNouns) {
    if (token == n.singular || token == n.plural) return &n;
  }
  return nullptr;
}

const WordForm* find_word_form(std::string_view token) {
  for (const WordForm& w : kWordForms) {
    if (token == w.adjective || token == w.adverb) return &w;
  }
  return nullptr;
}

bool is_article(std::string_view token) {
  return std::find(kArticles.begin(), kArticles.end(), token) !=
         kArticles.end();
}

bool is_preposition(std::string_view token) {
  return std::find(kPrepositions.begin(), kPrepositions.end(), token) !=
         kPrepositions.end();
}

}  // namespace lexicon

const std::vector<std::string>& RuleConfig::rule_names() {
  static const std::vector<std::string> names = {
      "artordet", "sva", "nn", "vform", "prep", "wform", "wo"};
  return names;
}

RuleConfig::RuleConfig() {
  for (const auto& name : rule_names()) probabilities_[name] = 0.3;
}

double RuleConfig::probability(const std::string& rule) const {
  auto it = probabilities_.find(rule);
  if (it == probabilities_.end()) {
    throw ConfigError("unknown error rule: " + rule);
  }
  return it->second;
}

void RuleConfig::set_probability(const std::string& rule, double p) {
  if (probabilities_.find(rule) == probabilities_.end()) {
    throw ConfigError("unknown error rule: " + rule);
  }
  if (p < 0.0 || p > 1.0) {
    throw ConfigError("rule probability out of [0,1]: " + rule);
  }
  probabilities_[rule] = p;
}

RuleConfig RuleConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read rule config: " + path);
  RuleConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    TokenSeq parts = split_tokens(line);
    if (parts.empty()) continue;
    if (parts.size() != 3 || parts[1] != "=") {
      throw ParseError("expected `rule = probability`", line_no);
    }
    double p = 0.0;
    try {
      p = std::stod(parts[2]);
    } catch (const std::exception&) {
      throw ParseError("cannot parse probability", line_no);
    }
    config.set_probability(parts[0], p);
  }
  return config;
}

void RuleConfig::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write rule config: " + path);
  for (const auto& [name, p] : probabilities_) {
    out << name << " = " << p << '\n';
  }
}

namespace {

struct Corruption {
  std::size_t begin = 0;  // clean-sentence coordinates
  std::size_t end = 0;
  TokenSeq replacement;
  std::string type;
};

// A site is usable only if the span plus a one-token margin on each side is
// still untouched; this keeps gold edits from merging during extraction.
class ClaimMask {
 public:
  explicit ClaimMask(std::size_t n) : claimed_(n, false) {}

  bool available(std::size_t begin, std::size_t end) const {
    std::size_t lo = begin == 0 ? 0 : begin - 1;
    std::size_t hi = std::min(claimed_.size(), end + 1);
    for (std::size_t i = lo; i < hi; ++i) {
      if (claimed_[i]) return false;
    }
    return true;
  }

  void claim(std::size_t begin, std::size_t end) {
    std::size_t lo = begin == 0 ? 0 : begin - 1;
    std::size_t hi = std::min(claimed_.size(), end + 1);
    for (std::size_t i = lo; i < hi; ++i) claimed_[i] = true;
  }

 private:
  std::vector<bool> claimed_;
};

using SiteFinder = std::vector<Corruption> (*)(const TokenSeq&,
                                               const ClaimMask&, Rng&);

std::vector<Corruption> artordet_sites(const TokenSeq& s, const ClaimMask& mask,
                                       Rng&) {
  std::vector<Corruption> sites;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!lexicon::is_article(s[i]) || !mask.available(i, i + 1)) continue;
    sites.push_back({i, i + 1, {}, std::string(error_type::kArtOrDet)});
  }
  return sites;
}

std::vector<Corruption> sva_sites(const TokenSeq& s, const ClaimMask& mask,
                                  Rng&) {
  std::vector<Corruption> sites;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const lexicon::Verb* v = lexicon::find_verb(s[i]);
    if (!v || !mask.available(i, i + 1)) continue;
    std::string flipped(s[i] == v->base ? v->third : v->base);
    sites.push_back({i, i + 1, {flipped}, std::string(error_type::kSva)});
  }
  return sites;
}

std::vector<Corruption> nn_sites(const TokenSeq& s, const ClaimMask& mask,
                                 Rng&) {
  std::vector<Corruption> sites;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const lexicon::Noun* n = lexicon::find_noun(s[i]);
    if (!n || !mask.available(i, i + 1)) continue;
    std::string flipped(s[i] == n->singular ? n->plural : n->singular);
    sites.push_back({i, i + 1, {flipped}, std::string(error_type::kNn)});
  }
  return sites;
}

std::vector<Corruption> vform_sites(const TokenSeq& s, const ClaimMask& mask,
                                    Rng&) {
  std::vector<Corruption> sites;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const lexicon::Verb* v = lexicon::find_verb(s[i]);
    if (!v || !mask.available(i, i + 1)) continue;
    sites.push_back(
        {i, i + 1, {std::string(v->ing)}, std::string(error_type::kVform)});
  }
  return sites;
}

std::vector<Corruption> prep_sites(const TokenSeq& s, const ClaimMask& mask,
                                   Rng&) {
  std::vector<Corruption> sites;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!lexicon::is_preposition(s[i]) || !mask.available(i, i + 1)) continue;
    sites.push_back({i, i + 1, {}, std::string(error_type::kPrep)});
  }
  return sites;
}

std::vector<Corruption> wform_sites(const TokenSeq& s, const ClaimMask& mask,
                                    Rng&) {
  std::vector<Corruption> sites;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const lexicon::WordForm* w = lexicon::find_word_form(s[i]);
    if (!w || !mask.available(i, i + 1)) continue;
    std::string flipped(s[i] == w->adjective ? w->adverb : w->adjective);
    sites.push_back({i, i + 1, {flipped}, std::string(error_type::kWform)});
  }
  return sites;
}

std::vector<Corruption> wo_sites(const TokenSeq& s, const ClaimMask& mask,
                                 Rng&) {
  std::vector<Corruption> sites;
  if (s.size() < 2) return sites;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (s[i] == s[i + 1] || s[i] == "." || s[i + 1] == ".") continue;
    if (!mask.available(i, i + 2)) continue;
    sites.push_back(
        {i, i + 2, {s[i + 1], s[i]}, std::string(error_type::kWo)});
  }
  return sites;
}

}  // namespace

SentencePair inject_errors(const TokenSeq& sentence, const RuleConfig& rules,
                           Rng& rng) {
  if (sentence.empty()) throw EmptyInputError("inject_errors: empty sentence");

  static const std::vector<std::pair<std::string, SiteFinder>> kRules = {
      {"artordet", artordet_sites}, {"sva", sva_sites},
      {"nn", nn_sites},             {"vform", vform_sites},
      {"prep", prep_sites},         {"wform", wform_sites},
      {"wo", wo_sites},
  };

  ClaimMask mask(sentence.size());
  std::vector<Corruption> applied;
  for (const auto& [name, finder] : kRules) {
    // The coin is drawn unconditionally so the stream stays aligned across
    // rule configurations.
    bool fire = rng.bernoulli(rules.probability(name));
    if (!fire) continue;
    std::vector<Corruption> sites = finder(sentence, mask, rng);
    if (sites.empty()) continue;
    Corruption chosen = sites[rng.next_index(sites.size())];
    if (name == "artordet") {
      // Half deletions, half a<->the substitutions.
      if (!rng.bernoulli(0.5)) {
        chosen.replacement = {sentence[chosen.begin] == "a"
                                  ? std::string("the")
                                  : std::string("a")};
      }
    } else if (name == "prep") {
      std::vector<std::string_view> others;
      for (std::string_view p : lexicon::prepositions()) {
        if (p != sentence[chosen.begin]) others.push_back(p);
      }
      chosen.replacement = {std::string(others[rng.next_index(others.size())])};
    }
    mask.claim(chosen.begin, chosen.end);
    applied.push_back(std::move(chosen));
  }

  SentencePair pair;
  pair.target = sentence;
  if (applied.empty()) {
    pair.source = sentence;
    return pair;
  }
  std::sort(applied.begin(), applied.end(),
            [](const Corruption& a, const Corruption& b) {
              return a.begin < b.begin;
            });

  // Build the corrupted source and remember where each corruption landed.
  struct SourceSpan {
    std::size_t begin, end;
    const Corruption* corruption;
  };
  std::vector<SourceSpan> spans;
  TokenSeq source;
  std::size_t cursor = 0;
  for (const Corruption& c : applied) {
    for (; cursor < c.begin; ++cursor) source.push_back(sentence[cursor]);
    std::size_t begin = source.size();
    for (const auto& t : c.replacement) source.push_back(t);
    spans.push_back({begin, source.size(), &c});
    cursor = c.end;
  }
  for (; cursor < sentence.size(); ++cursor) source.push_back(sentence[cursor]);

  // Gold edits are taken from the canonical extractor so that a perfect
  // hypothesis reproduces them exactly; the rule tags are reattached by span.
  std::vector<Edit> extracted = extract_edits(source, sentence);
  pair.source = std::move(source);
  for (const Edit& e : extracted) {
    const Corruption* best = nullptr;
    long best_distance = 0;
    for (const SourceSpan& span : spans) {
      bool touches = span.begin <= e.end && e.begin <= span.end;
      long mid_edit = static_cast<long>(e.begin + e.end);
      long mid_span = static_cast<long>(span.begin + span.end);
      long distance = std::abs(mid_edit - mid_span);
      if (touches) distance = -1;
      if (!best || distance < best_distance) {
        best = span.corruption;
        best_distance = distance;
      }
    }
    LabeledEdit edit;
    edit.begin = e.begin;
    edit.end = e.end;
    edit.replacement = e.replacement;
    edit.type = best ? best->type : std::string(error_type::kWo);
    pair.edits.push_back(std::move(edit));
  }
  return pair;
}

}  // namespace fbgec
