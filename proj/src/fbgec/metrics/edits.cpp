#include "fbgec/metrics/edits.hpp"

#include <algorithm>

namespace fbgec {

std::size_t levenshtein_distance(const TokenSeq& a, const TokenSeq& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t old = row[j];
      std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({sub, row[j] + 1, row[j - 1] + 1});
      diag = old;
    }
  }
  return row[b.size()];
}

namespace {

enum class Op : unsigned char { kMatch, kSub, kDel, kIns };

}  // namespace

std::vector<Edit> extract_edits(const TokenSeq& source,
                                const TokenSeq& hypothesis) {
  const std::size_t m = source.size();
  const std::size_t n = hypothesis.size();
  std::vector<std::size_t> d((m + 1) * (n + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& {
    return d[i * (n + 1) + j];
  };
  for (std::size_t i = 0; i <= m; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= n; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      std::size_t sub =
          at(i - 1, j - 1) + (source[i - 1] == hypothesis[j - 1] ? 0 : 1);
      at(i, j) = std::min({sub, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }

  // Backtrace with the fixed preference order; ops come out reversed.
  std::vector<Op> ops;
  ops.reserve(m + n);
  std::size_t i = m;
  std::size_t j = n;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && source[i - 1] == hypothesis[j - 1] &&
        at(i, j) == at(i - 1, j - 1)) {
      ops.push_back(Op::kMatch);
      --i;
      --j;
    } else if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) + 1 &&
               source[i - 1] != hypothesis[j - 1]) {
      ops.push_back(Op::kSub);
      --i;
      --j;
    } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      ops.push_back(Op::kDel);
      --i;
    } else {
      ops.push_back(Op::kIns);
      --j;
    }
  }
  std::reverse(ops.begin(), ops.end());

  // Merge runs of non-match operations into span edits.
  std::vector<Edit> edits;
  std::size_t src_pos = 0;
  std::size_t hyp_pos = 0;
  bool open = false;
  for (Op op : ops) {
    if (op == Op::kMatch) {
      open = false;
      ++src_pos;
      ++hyp_pos;
      continue;
    }
    if (!open) {
      edits.push_back(Edit{src_pos, src_pos, {}});
      open = true;
    }
    Edit& e = edits.back();
    switch (op) {
      case Op::kSub:
        e.replacement.push_back(hypothesis[hyp_pos]);
        ++src_pos;
        ++hyp_pos;
        break;
      case Op::kDel:
        ++src_pos;
        break;
      case Op::kIns:
        e.replacement.push_back(hypothesis[hyp_pos]);
        ++hyp_pos;
        break;
      case Op::kMatch:
        break;
    }
    e.end = src_pos;
  }
  return edits;
}

}  // namespace fbgec
