#pragma once

#include <map>
#include <span>
#include <string_view>

#include "fbgec/rng.hpp"
#include "fbgec/text/corpus.hpp"

namespace fbgec {

// Error type tags shared by the synthetic rules and the evaluation reports.
namespace error_type {
inline constexpr std::string_view kArtOrDet = "ArtOrDet";
inline constexpr std::string_view kSva = "SVA";
inline constexpr std::string_view kNn = "Nn";
inline constexpr std::string_view kVform = "Vform";
inline constexpr std::string_view kPrep = "Prep";
inline constexpr std::string_view kWform = "Wform";
inline constexpr std::string_view kWo = "WO";
}  // namespace error_type

// The closed lexicon the synthetic grammar draws from. The corruption rules
// use the same tables to find eligible sites.
namespace lexicon {

struct Verb {
  std::string_view base;
  std::string_view third;  // third person singular
  std::string_view ing;
};

struct Noun {
  std::string_view singular;
  std::string_view plural;
};

struct WordForm {
  std::string_view adjective;
  std::string_view adverb;
};

std::span<const Verb> verbs();
std::span<const Noun> nouns();
std::span<const WordForm> word_forms();
std::span<const std::string_view> articles();
std::span<const std::string_view> prepositions();
std::span<const std::string_view> singular_subjects();
std::span<const std::string_view> plural_subjects();

const Verb* find_verb(std::string_view token);          // by base or third
const Noun* find_noun(std::string_view token);          // by either form
const WordForm* find_word_form(std::string_view token); // by either form
bool is_article(std::string_view token);
bool is_preposition(std::string_view token);

}  // namespace lexicon

// Per-rule application probabilities. Every rule defaults to 0.3.
class RuleConfig {
 public:
  static const std::vector<std::string>& rule_names();

  RuleConfig();  // all defaults

  double probability(const std::string& rule) const;
  void set_probability(const std::string& rule, double p);

  // Key-value text file: `rule = probability`, '#' comments.
  static RuleConfig load(const std::string& path);
  void save(const std::string& path) const;

 private:
  std::map<std::string, double> probabilities_;
};

// Corrupts a clean sentence with each eligible rule firing at its configured
// probability. Returns (corrupted, original) with gold edits that map the
// corrupted source back onto the original, tagged with the producing rule.
// The edits are in the canonical form extract_edits would produce, so a
// perfect correction scores a full match. Corruption sites keep at least one
// untouched token between them.
SentencePair inject_errors(const TokenSeq& sentence, const RuleConfig& rules,
                           Rng& rng);

}  // namespace fbgec
