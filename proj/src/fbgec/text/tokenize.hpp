#pragma once

#include <string_view>

#include "fbgec/common.hpp"

namespace fbgec {

// Whitespace split with boundary punctuation peeled into separate tokens
// ("book." -> "book", "."). Interior punctuation is kept ("don't").
// Throws EmptyInputError when no token survives.
TokenSeq tokenize(std::string_view text, bool lowercase = false);

}  // namespace fbgec
