#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace genformer {

// Deterministic random stream. All draws are derived from mt19937_64 through
// fixed arithmetic (no std::distribution objects), so sequences are identical
// across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // splitmix64 mix of (seed, stream); used to derive independent substreams.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on (0, 1), never exactly 0 or 1.
  double uniform01();

  // Uniform on [lo, hi).
  double uniform(double lo, double hi);

  // Standard normal via inverse-CDF transform.
  double normal();

  // Gamma(shape, rate) via inverse-CDF transform (exponential fast path at shape 1).
  double gamma(double shape, double rate);

  // Uniform index in [0, n).
  std::size_t index(std::size_t n);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace genformer
