#include "genformer/rng.hpp"

#include <cmath>

#include "genformer/special.hpp"

namespace genformer {

std::uint64_t Rng::derive(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform01() {
  // 53 random bits, offset by half an ulp so the result stays inside (0, 1).
  return (static_cast<double>(gen_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

double Rng::normal() { return gaussian_quantile(uniform01()); }

double Rng::gamma(double shape, double rate) {
  double u = uniform01();
  if (shape == 1.0) return -std::log1p(-u) / rate;
  return gamma_quantile(u, shape, rate);
}

std::size_t Rng::index(std::size_t n) {
  // Rejection sampling keeps the draw exactly uniform.
  if (n <= 1) return 0;
  std::uint64_t bound = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = gen_();
  } while (x >= bound);
  return static_cast<std::size_t>(x % n);
}

}  // namespace genformer
