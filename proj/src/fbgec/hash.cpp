#include "fbgec/hash.hpp"

#include <array>
#include <fstream>

namespace fbgec {

std::uint64_t hash_tokens(const TokenSeq& tokens) {
  std::uint64_t h = kFnvOffset;
  for (const auto& t : tokens) {
    h = fnv1a64(t, h);
    h ^= 0x1f;
    h *= kFnvPrime;
  }
  return h;
}

std::string to_hex(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

std::uint64_t hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read file: " + path);
  std::uint64_t h = kFnvOffset;
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    std::streamsize n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[static_cast<std::size_t>(i)]);
      h *= kFnvPrime;
    }
  }
  return h;
}

}  // namespace fbgec
