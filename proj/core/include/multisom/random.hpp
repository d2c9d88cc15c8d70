#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace multisom {

__extension__ typedef unsigned __int128 uint128_t;

/// Seeded generator used throughout the library: std::mt19937_64 with the
/// distribution mappings spelled out here instead of the implementation-defined
/// <random> distributions, so streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n) by multiply-shift (n > 0).
  std::uint64_t index(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<uint128_t>(engine_()) * n) >> 64);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Fisher-Yates, last element first.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace multisom
