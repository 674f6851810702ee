#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "fbgec/common.hpp"

namespace fbgec {

// A span edit over a source sentence: tokens [begin, end) are replaced by
// `replacement`. begin == end encodes an insertion before position begin.
struct Edit {
  std::size_t begin = 0;
  std::size_t end = 0;
  TokenSeq replacement;

  bool operator==(const Edit&) const = default;
};

struct LabeledEdit : Edit {
  std::string type;

  bool operator==(const LabeledEdit&) const = default;
};

// Applies sorted, non-overlapping edits. Throws InputMismatchError when the
// edit list violates those invariants or exceeds the source length.
TokenSeq apply_edits(const TokenSeq& source, std::span<const Edit> edits);
TokenSeq apply_edits(const TokenSeq& source,
                     std::span<const LabeledEdit> edits);

struct SentencePair {
  TokenSeq source;
  TokenSeq target;
  std::vector<LabeledEdit> edits;  // when present, maps source onto target
};

enum class CorpusFormat { kTsv, kM2 };

// One source sentence with the edit sets of every annotator that marked it.
struct M2Record {
  TokenSeq source;
  std::map<int, std::vector<LabeledEdit>> annotations;
};

std::vector<SentencePair> load_tsv(const std::string& path);
void save_tsv(const std::string& path, std::span<const SentencePair> pairs);

std::vector<M2Record> load_m2(const std::string& path);
void save_m2(const std::string& path, std::span<const SentencePair> pairs);

// TSV yields pairs without edits; m2 applies the lowest-numbered annotator's
// edits to produce the target side.
std::vector<SentencePair> load_parallel_corpus(const std::string& path,
                                               CorpusFormat format);

// One sentence per line, pre-tokenized (whitespace separated).
std::vector<TokenSeq> load_sentences(const std::string& path);
void save_sentences(const std::string& path, std::span<const TokenSeq> lines);

// The native-data extension: (x, x) identity pairs with no edits.
std::vector<SentencePair> self_copy_pairs(std::span<const TokenSeq> native);

}  // namespace fbgec
