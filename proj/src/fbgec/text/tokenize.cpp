#include "fbgec/text/tokenize.hpp"

#include <cctype>

namespace fbgec {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_boundary_punct(char c) {
  switch (c) {
    case '.':
    case ',':
    case '!':
    case '?':
    case ';':
    case ':':
    case '"':
    case '(':
    case ')':
    case '[':
    case ']':
      return true;
    default:
      return false;
  }
}

void emit(TokenSeq& out, std::string_view chunk, bool lowercase) {
  if (chunk.empty()) return;
  std::string token(chunk);
  if (lowercase) {
    for (char& c : token)
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  out.push_back(std::move(token));
}

// Peels leading/trailing punctuation off a whitespace-delimited chunk.
void split_chunk(TokenSeq& out, std::string_view chunk, bool lowercase) {
  std::size_t begin = 0;
  std::size_t end = chunk.size();
  while (begin < end && is_boundary_punct(chunk[begin])) {
    emit(out, chunk.substr(begin, 1), lowercase);
    ++begin;
  }
  // Trailing puncts are collected first, then emitted after the core token
  // so the order matches the surface order.
  std::size_t tail = end;
  while (tail > begin && is_boundary_punct(chunk[tail - 1])) --tail;
  emit(out, chunk.substr(begin, tail - begin), lowercase);
  for (std::size_t i = tail; i < end; ++i) {
    emit(out, chunk.substr(i, 1), lowercase);
  }
}

}  // namespace

TokenSeq tokenize(std::string_view text, bool lowercase) {
  TokenSeq out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) split_chunk(out, text.substr(start, i - start), lowercase);
  }
  if (out.empty()) throw EmptyInputError("tokenize: no tokens in input");
  return out;
}

}  // namespace fbgec
