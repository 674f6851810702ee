#include "fbgec/text/corpus.hpp"

#include <fstream>
#include <sstream>

namespace fbgec {

namespace {

template <typename EditT>
TokenSeq apply_edits_impl(const TokenSeq& source, std::span<const EditT> edits) {
  TokenSeq out;
  std::size_t cursor = 0;
  std::size_t prev_end = 0;
  bool prev_zero_width = false;
  std::size_t prev_begin = 0;
  for (const EditT& e : edits) {
    if (e.begin > e.end || e.end > source.size()) {
      throw InputMismatchError("edit span out of range");
    }
    if (e.begin < prev_end ||
        (prev_zero_width && e.begin == prev_begin && e.begin == e.end)) {
      throw InputMismatchError("edits overlap or are unsorted");
    }
    for (; cursor < e.begin; ++cursor) out.push_back(source[cursor]);
    for (const auto& t : e.replacement) out.push_back(t);
    cursor = e.end;
    prev_end = e.end;
    prev_begin = e.begin;
    prev_zero_width = (e.begin == e.end);
  }
  for (; cursor < source.size(); ++cursor) out.push_back(source[cursor]);
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read file: " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  return out;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

TokenSeq apply_edits(const TokenSeq& source, std::span<const Edit> edits) {
  return apply_edits_impl<Edit>(source, edits);
}

TokenSeq apply_edits(const TokenSeq& source,
                     std::span<const LabeledEdit> edits) {
  return apply_edits_impl<LabeledEdit>(source, edits);
}

std::vector<SentencePair> load_tsv(const std::string& path) {
  auto in = open_input(path);
  std::vector<SentencePair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError("expected exactly two tab-separated fields", line_no);
    }
    SentencePair pair;
    pair.source = split_tokens(std::string_view(line).substr(0, tab));
    pair.target = split_tokens(std::string_view(line).substr(tab + 1));
    if (pair.source.empty() || pair.target.empty()) {
      throw ParseError("empty source or target field", line_no);
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

void save_tsv(const std::string& path, std::span<const SentencePair> pairs) {
  auto out = open_output(path);
  for (const auto& pair : pairs) {
    out << join_tokens(pair.source) << '\t' << join_tokens(pair.target)
        << '\n';
  }
  if (!out) throw IoError("failed writing: " + path);
}

std::vector<M2Record> load_m2(const std::string& path) {
  auto in = open_input(path);
  std::vector<M2Record> records;
  M2Record current;
  bool have_source = false;
  std::string line;
  std::size_t line_no = 0;

  auto flush = [&]() {
    if (have_source) {
      records.push_back(std::move(current));
      current = M2Record{};
      have_source = false;
    }
  };

  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) {
      flush();
      continue;
    }
    if (line.rfind("S ", 0) == 0) {
      flush();
      current.source = split_tokens(std::string_view(line).substr(2));
      if (current.source.empty()) throw ParseError("empty S line", line_no);
      have_source = true;
      continue;
    }
    if (line.rfind("A ", 0) == 0) {
      if (!have_source) throw ParseError("A line before S line", line_no);
      // A <start> <end>|||<type>|||<replacement>|||<req>|||<comment>|||<annotator>
      std::string body = line.substr(2);
      std::vector<std::string> fields;
      std::size_t pos = 0;
      while (true) {
        std::size_t sep = body.find("|||", pos);
        if (sep == std::string::npos) {
          fields.push_back(body.substr(pos));
          break;
        }
        fields.push_back(body.substr(pos, sep - pos));
        pos = sep + 3;
      }
      if (fields.size() < 3) throw ParseError("too few fields in A line", line_no);
      std::istringstream span_in(fields[0]);
      long begin = 0;
      long end = 0;
      if (!(span_in >> begin >> end)) {
        throw ParseError("cannot parse edit span", line_no);
      }
      int annotator = 0;
      if (fields.size() >= 6) {
        try {
          annotator = std::stoi(fields[5]);
        } catch (const std::exception&) {
          throw ParseError("cannot parse annotator id", line_no);
        }
      }
      if (begin == -1 && end == -1) {
        // noop annotation: the annotator saw nothing to fix.
        current.annotations.try_emplace(annotator);
        continue;
      }
      if (begin < 0 || end < begin ||
          static_cast<std::size_t>(end) > current.source.size()) {
        throw ParseError("edit span out of range", line_no);
      }
      LabeledEdit edit;
      edit.begin = static_cast<std::size_t>(begin);
      edit.end = static_cast<std::size_t>(end);
      edit.type = fields[1];
      if (!fields[2].empty() && fields[2] != "-NONE-") {
        edit.replacement = split_tokens(fields[2]);
      }
      current.annotations[annotator].push_back(std::move(edit));
      continue;
    }
    throw ParseError("unrecognized m2 line", line_no);
  }
  flush();

  // Validate per-annotator edit lists: sorted, non-overlapping.
  for (auto& record : records) {
    for (auto& [annotator, edits] : record.annotations) {
      (void)annotator;
      std::size_t prev_end = 0;
      bool first = true;
      for (const auto& e : edits) {
        if (!first && e.begin < prev_end) {
          throw ParseError("overlapping edits for one annotator", 0);
        }
        prev_end = e.end;
        first = false;
      }
    }
  }
  return records;
}

void save_m2(const std::string& path, std::span<const SentencePair> pairs) {
  auto out = open_output(path);
  for (const auto& pair : pairs) {
    out << "S " << join_tokens(pair.source) << '\n';
    for (const auto& e : pair.edits) {
      out << "A " << e.begin << ' ' << e.end << "|||" << e.type << "|||"
          << (e.replacement.empty() ? std::string("-NONE-")
                                    : join_tokens(e.replacement))
          << "|||REQUIRED|||-NONE-|||0\n";
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing: " + path);
}

std::vector<SentencePair> load_parallel_corpus(const std::string& path,
                                               CorpusFormat format) {
  if (format == CorpusFormat::kTsv) return load_tsv(path);
  std::vector<SentencePair> pairs;
  for (auto& record : load_m2(path)) {
    SentencePair pair;
    pair.source = std::move(record.source);
    if (!record.annotations.empty()) {
      pair.edits = record.annotations.begin()->second;
    }
    pair.target = apply_edits(pair.source, pair.edits);
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

std::vector<TokenSeq> load_sentences(const std::string& path) {
  auto in = open_input(path);
  std::vector<TokenSeq> sentences;
  std::string line;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) continue;
    sentences.push_back(split_tokens(line));
  }
  return sentences;
}

void save_sentences(const std::string& path, std::span<const TokenSeq> lines) {
  auto out = open_output(path);
  for (const auto& sentence : lines) out << join_tokens(sentence) << '\n';
  if (!out) throw IoError("failed writing: " + path);
}

std::vector<SentencePair> self_copy_pairs(std::span<const TokenSeq> native) {
  std::vector<SentencePair> pairs;
  pairs.reserve(native.size());
  for (const auto& sentence : native) {
    SentencePair pair;
    pair.source = sentence;
    pair.target = sentence;
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

}  // namespace fbgec
