#include "fbgec/seq2seq/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace fbgec {

namespace {

constexpr char kMagic[4] = {'F', 'B', 'S', '2'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

}  // namespace

void save_checkpoint(const CorrectionModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  const ModelConfig& cfg = model.config();
  write_pod<std::int32_t>(out, cfg.embed_dim);
  write_pod<std::int32_t>(out, cfg.hidden_dim);
  write_pod<std::uint8_t>(
      out, cfg.direction == Direction::kRightToLeft ? 1 : 0);
  write_pod<double>(out, cfg.dropout);
  write_pod<std::uint64_t>(out, cfg.seed);
  write_pod<std::uint64_t>(out, model.vocab().fingerprint());
  write_pod<std::uint64_t>(out, model.training_steps());

  const_cast<ParamSet&>(model.params())
      .visit([&](const std::string&, auto& m) {
        write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
        write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
        out.write(reinterpret_cast<const char*>(m.data()),
                  static_cast<std::streamsize>(sizeof(double) *
                                               static_cast<std::size_t>(m.size())));
      });
  if (!out) throw IoError("failed writing checkpoint: " + path);
}

CorrectionModel load_checkpoint(const std::string& path,
                                std::shared_ptr<const Vocabulary> vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint: " + path);
  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("not a model checkpoint: " + path, 0);
  }
  if (read_pod<std::uint32_t>(in) != kVersion) {
    throw ParseError("unsupported checkpoint version", 0);
  }
  ModelConfig cfg;
  cfg.embed_dim = read_pod<std::int32_t>(in);
  cfg.hidden_dim = read_pod<std::int32_t>(in);
  cfg.direction = read_pod<std::uint8_t>(in) != 0 ? Direction::kRightToLeft
                                                  : Direction::kLeftToRight;
  cfg.dropout = read_pod<double>(in);
  cfg.seed = read_pod<std::uint64_t>(in);
  std::uint64_t fingerprint = read_pod<std::uint64_t>(in);
  std::uint64_t steps = read_pod<std::uint64_t>(in);
  if (!vocab) {
    throw Error(ErrorCode::kInvalidArgument, "load_checkpoint: no vocabulary");
  }
  if (vocab->fingerprint() != fingerprint) {
    throw InputMismatchError(
        "checkpoint was trained with a different vocabulary: " + path);
  }
  CorrectionModel model(cfg, std::move(vocab));
  model.set_training_steps(steps);
  model.params().visit([&](const std::string& name, auto& m) {
    auto rows = read_pod<std::uint32_t>(in);
    auto cols = read_pod<std::uint32_t>(in);
    if (rows != static_cast<std::uint32_t>(m.rows()) ||
        cols != static_cast<std::uint32_t>(m.cols())) {
      throw ParseError("checkpoint shape mismatch at " + name, 0);
    }
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) *
                                         static_cast<std::size_t>(m.size())));
  });
  if (!in) throw ParseError("truncated checkpoint: " + path, 0);
  return model;
}

}  // namespace fbgec
