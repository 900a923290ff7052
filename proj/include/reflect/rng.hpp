#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace reflect {

// xoshiro256** seeded through splitmix64. All draws are implemented here
// (no std distributions) so streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Independent named stream: the seed is a hash of (master, name, index),
  // so adding a stream never shifts the draws of another one.
  static Rng stream(std::uint64_t master, std::string_view name,
                    std::uint64_t index = 0);

  std::uint64_t next();
  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform();
  bool bernoulli(double p) { return uniform() < p; }
  // Uniform integer in [0, n). below(1) returns 0 without consuming a draw.
  std::size_t below(std::size_t n);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::string_view name,
                          std::uint64_t index = 0);

}  // namespace reflect
