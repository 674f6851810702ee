#pragma once

#include <cstdint>
#include <vector>

#include "fbgec/hash.hpp"

namespace fbgec {

// splitmix64; used to turn (global seed, component name) into independent
// stream seeds so that adding a consumer never shifts another stream.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t global_seed,
                                    std::string_view component) {
  return splitmix64(global_seed ^ fnv1a64(component));
}

// xoshiro-free minimal generator: splitmix64 stream. All sampling helpers are
// hand-rolled so sequences do not depend on the standard library's
// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [0, n). n must be > 0. Modulo bias is negligible here.
  std::size_t next_index(std::size_t n) { return next_u64() % n; }

  bool bernoulli(double p) { return next_double() < p; }

  // Uniform in [lo, hi).
  double next_range(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = next_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // First k elements of a Fisher-Yates pass over [0, n): a uniform sample
  // without replacement.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

 private:
  std::uint64_t state_;
};

inline std::vector<std::size_t> Rng::sample_indices(std::size_t n,
                                                    std::size_t k) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  if (k > n) k = n;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + next_index(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace fbgec
