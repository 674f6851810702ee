#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fbgec {

// A sentence is a sequence of surface tokens. Models and the n-gram LM map
// tokens to integer ids through their own Vocabulary at their boundary.
using TokenSeq = std::vector<std::string>;

using TokenId = std::int32_t;
using TokenIds = std::vector<TokenId>;

// Error classes, one per CLI exit code / C API status code.
enum class ErrorCode : int {
  kOk = 0,
  kInternal = 1,
  kConfig = 2,
  kParse = 3,
  kStageDependency = 4,
  kDiverged = 5,
  kMismatch = 6,
  kIo = 7,
  kInvalidArgument = 8,
  kArtifactExists = 9,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct EmptyInputError : Error {
  explicit EmptyInputError(const std::string& m = "empty input")
      : Error(ErrorCode::kInvalidArgument, m) {}
};

struct EmptyCorpusError : Error {
  explicit EmptyCorpusError(const std::string& m = "empty corpus")
      : Error(ErrorCode::kInvalidArgument, m) {}
};

struct ParseError : Error {
  ParseError(const std::string& m, std::size_t line)
      : Error(ErrorCode::kParse, m + " (line " + std::to_string(line) + ")"),
        line_number(line) {}
  std::size_t line_number;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error(ErrorCode::kConfig, m) {}
};

struct StageDependencyError : Error {
  explicit StageDependencyError(const std::string& m)
      : Error(ErrorCode::kStageDependency, m) {}
};

struct DivergedTrainingError : Error {
  explicit DivergedTrainingError(const std::string& m)
      : Error(ErrorCode::kDiverged, m) {}
};

struct EnsembleMismatchError : Error {
  explicit EnsembleMismatchError(const std::string& m)
      : Error(ErrorCode::kMismatch, m) {}
};

struct DirectionError : Error {
  explicit DirectionError(const std::string& m)
      : Error(ErrorCode::kMismatch, m) {}
};

struct InputMismatchError : Error {
  explicit InputMismatchError(const std::string& m)
      : Error(ErrorCode::kMismatch, m) {}
};

struct IoError : Error {
  explicit IoError(const std::string& m) : Error(ErrorCode::kIo, m) {}
};

struct ArtifactExistsError : Error {
  explicit ArtifactExistsError(const std::string& m)
      : Error(ErrorCode::kArtifactExists, m) {}
};

inline std::string join_tokens(const TokenSeq& tokens, char sep = ' ') {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(sep);
    out += tokens[i];
  }
  return out;
}

inline TokenSeq split_tokens(std::string_view line) {
  TokenSeq out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.emplace_back(line.substr(start, i - start));
  }
  return out;
}

}  // namespace fbgec
