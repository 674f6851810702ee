#include "fbgec/text/synthesis.hpp"

#include <array>
#include <string>

#include "fbgec/text/error_rules.hpp"

namespace fbgec {

namespace {

using lexicon::Noun;
using lexicon::Verb;

struct VerbUsage {
  std::string_view base;
  bool transitive;
  std::array<std::string_view, 3> preps;  // empty entries unused
  std::size_t prep_count;
};

// Which prepositions each verb licenses. Verbs without prepositions only
// appear in transitive or adverbial templates.
constexpr std::array kVerbUsages = {
    VerbUsage{"come", false, {"to"}, 1},
    VerbUsage{"see", true, {}, 0},
    VerbUsage{"like", true, {}, 0},
    VerbUsage{"read", true, {}, 0},
    VerbUsage{"write", true, {}, 0},
    VerbUsage{"visit", true, {}, 0},
    VerbUsage{"find", true, {}, 0},
    VerbUsage{"play", true, {"at", "in", "near"}, 3},
    VerbUsage{"watch", true, {}, 0},
    VerbUsage{"sing", true, {}, 0},
    VerbUsage{"buy", true, {}, 0},
    VerbUsage{"open", true, {}, 0},
    VerbUsage{"walk", false, {"in", "near", "to"}, 3},
    VerbUsage{"paint", true, {}, 0},
};

constexpr std::array<std::string_view, 4> kPlaceNouns = {"park", "garden",
                                                         "house", "city"};
constexpr std::array<std::string_view, 3> kPersonNouns = {"friend", "teacher",
                                                          "dog"};

const Verb& verb_entry(std::string_view base) {
  for (const Verb& v : lexicon::verbs()) {
    if (v.base == base) return v;
  }
  throw Error(ErrorCode::kInternal, "verb missing from lexicon");
}

class Generator {
 public:
  explicit Generator(Rng& rng) : rng_(rng) {}

  TokenSeq sentence() {
    double u = rng_.next_double();
    if ((u -= 0.18) < 0) return transitive(false, false, false);
    if ((u -= 0.14) < 0) return transitive_with_pp();
    if ((u -= 0.10) < 0) return adverbial();
    if ((u -= 0.12) < 0) return transitive(true, false, false);
    if ((u -= 0.10) < 0) return transitive(false, true, false);
    if ((u -= 0.12) < 0) return motion(false);
    if ((u -= 0.08) < 0) return motion(true);
    if ((u -= 0.08) < 0) return transitive(false, false, true);
    if ((u -= 0.05) < 0) return transitive(true, true, false);
    return transitive_plural_object();
  }

 private:
  Rng& rng_;

  std::string_view pick(std::span<const std::string_view> items) {
    return items[rng_.next_index(items.size())];
  }

  template <typename T>
  const T& pick_entry(std::span<const T> items) {
    return items[rng_.next_index(items.size())];
  }

  const VerbUsage& pick_verb(bool want_transitive, bool want_preps) {
    for (;;) {
      const VerbUsage& u = kVerbUsages[rng_.next_index(kVerbUsages.size())];
      if (want_transitive && !u.transitive) continue;
      if (want_preps && u.prep_count == 0) continue;
      return u;
    }
  }

  std::string subject(bool plural) {
    return std::string(plural ? pick(lexicon::plural_subjects())
                              : pick(lexicon::singular_subjects()));
  }

  std::string finite(const VerbUsage& usage, bool plural_subject) {
    const Verb& v = verb_entry(usage.base);
    return std::string(plural_subject ? v.base : v.third);
  }

  void noun_phrase(TokenSeq& out, bool with_adjective, bool plural_noun,
                   std::span<const std::string_view> pool = {}) {
    std::string noun;
    if (pool.empty()) {
      const Noun& n = pick_entry(lexicon::nouns());
      noun = std::string(plural_noun ? n.plural : n.singular);
    } else {
      std::string_view singular = pick(pool);
      const Noun* n = lexicon::find_noun(singular);
      noun = std::string(plural_noun ? n->plural : singular);
    }
    // Plural noun phrases always take "the"; singular ones draw an article.
    if (plural_noun) {
      out.push_back("the");
    } else {
      out.push_back(rng_.bernoulli(0.5) ? "a" : "the");
    }
    if (with_adjective) {
      out.push_back(
          std::string(pick_entry(lexicon::word_forms()).adjective));
    }
    out.push_back(noun);
  }

  TokenSeq transitive(bool plural_subject, bool with_adjective,
                      bool with_adverb) {
    const VerbUsage& usage = pick_verb(true, false);
    TokenSeq out{subject(plural_subject), finite(usage, plural_subject)};
    noun_phrase(out, with_adjective, false);
    if (with_adverb) {
      out.push_back(std::string(pick_entry(lexicon::word_forms()).adverb));
    }
    out.push_back(".");
    return out;
  }

  TokenSeq transitive_plural_object() {
    const VerbUsage& usage = pick_verb(true, false);
    TokenSeq out{subject(false), finite(usage, false)};
    noun_phrase(out, false, true);
    out.push_back(".");
    return out;
  }

  TokenSeq transitive_with_pp() {
    const VerbUsage& usage = pick_verb(true, false);
    TokenSeq out{subject(false), finite(usage, false)};
    noun_phrase(out, false, false);
    out.push_back(rng_.bernoulli(0.5) ? "in" : "near");
    noun_phrase(out, false, false, kPlaceNouns);
    out.push_back(".");
    return out;
  }

  TokenSeq adverbial() {
    const VerbUsage& usage =
        kVerbUsages[rng_.next_index(kVerbUsages.size())];
    bool plural = rng_.bernoulli(0.25);
    TokenSeq out{subject(plural), finite(usage, plural)};
    out.push_back(std::string(pick_entry(lexicon::word_forms()).adverb));
    out.push_back(".");
    return out;
  }

  TokenSeq motion(bool plural_subject) {
    const VerbUsage& usage = pick_verb(false, true);
    TokenSeq out{subject(plural_subject), finite(usage, plural_subject)};
    out.push_back(
        std::string(usage.preps[rng_.next_index(usage.prep_count)]));
    noun_phrase(out, rng_.bernoulli(0.2), false, kPlaceNouns);
    if (rng_.bernoulli(0.25)) {
      out.push_back("with");
      noun_phrase(out, false, false, kPersonNouns);
    }
    out.push_back(".");
    return out;
  }
};

}  // namespace

std::vector<TokenSeq> generate_sentences(std::size_t count, Rng& rng) {
  Generator gen(rng);
  std::vector<TokenSeq> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(gen.sentence());
  return out;
}

}  // namespace fbgec
