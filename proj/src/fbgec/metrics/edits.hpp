#pragma once

#include <span>

#include "fbgec/text/corpus.hpp"

namespace fbgec {

// Token-level Levenshtein distance (match 0, substitution/insertion/deletion
// 1 each).
std::size_t levenshtein_distance(const TokenSeq& a, const TokenSeq& b);

// Minimal-cost alignment turned into span edits. Backtrace ties are broken
// in a fixed order (match, then substitution, then deletion, then insertion)
// which places insertions leftmost; adjacent non-match operations are merged
// into a single span edit. Applying the result to `source` reproduces
// `hypothesis` exactly.
std::vector<Edit> extract_edits(const TokenSeq& source,
                                const TokenSeq& hypothesis);

}  // namespace fbgec
