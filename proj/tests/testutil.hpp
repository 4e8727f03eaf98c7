#pragma once

#include <cmath>
#include <numeric>
#include <vector>

namespace testutil {

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  double mu = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - mu) * (x - mu);
  return acc / static_cast<double>(v.size());
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  double ma = mean(a), mb = mean(b);
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    da += (a[i] - ma) * (a[i] - ma);
    db += (b[i] - mb) * (b[i] - mb);
  }
  return num / std::sqrt(da * db);
}

// Erlang CDF (integer shape), used as an independent oracle for the gamma
// special functions: F(x) = 1 - exp(-rate x) * sum_{k<shape} (rate x)^k / k!
inline double erlang_cdf(double x, int shape, double rate) {
  if (x <= 0.0) return 0.0;
  double lx = rate * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < shape; ++k) {
    term *= lx / k;
    sum += term;
  }
  return 1.0 - std::exp(-lx) * sum;
}

}  // namespace testutil
