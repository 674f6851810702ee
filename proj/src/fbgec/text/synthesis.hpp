#pragma once

#include <cstddef>

#include "fbgec/rng.hpp"
#include "fbgec/text/corpus.hpp"

namespace fbgec {

// Draws clean sentences from a small weighted template grammar over the
// shared lexicon. Subjects agree with verb forms; prepositions are licensed
// by their verb so a corrupted preposition is detectably wrong.
std::vector<TokenSeq> generate_sentences(std::size_t count, Rng& rng);

}  // namespace fbgec
