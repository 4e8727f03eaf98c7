#pragma once

#include <cstdint>
#include <vector>

#include "genformer/marginals.hpp"
#include "genformer/types.hpp"

namespace genformer {

// m x m symmetric positive semi-definite second-moment matrix.
struct CorrelationMatrix {
  int m = 0;
  std::vector<double> a;  // row-major m x m

  CorrelationMatrix() = default;
  explicit CorrelationMatrix(int m_) : m(m_), a(static_cast<std::size_t>(m_) * m_, 0.0) {}

  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * m + j]; }
  double at(int i, int j) const { return a[static_cast<std::size_t>(i) * m + j]; }

  // Throws unless symmetric to 1e-12 (relative to the largest entry).
  void validate_symmetry() const;
};

struct CholeskyFactor {
  int m = 0;
  std::vector<double> lower;  // row-major, strictly upper part zero

  double at(int i, int j) const { return lower[static_cast<std::size_t>(i) * m + j]; }
};

// Uncentered second-moment matrix X X^T / n. Requires Gaussian space.
CorrelationMatrix spatial_correlation(const TimeSeriesMatrix& series);

// Lower Cholesky factor; near-singular inputs get 1e-10 diagonal jitter, a
// pivot below -1e-8 throws NotPsd.
CholeskyFactor cholesky(const CorrelationMatrix& c);

// Maps the sample's second-moment matrix onto the target: U = L Ltilde^-1 X.
// transpose_variant applies U = L Ltilde^T X instead (reproduces the printed
// formula; it does not satisfy the correction identity and carries no
// correctness claim).
TimeSeriesMatrix correlation_correct(const TimeSeriesMatrix& series,
                                     const CorrelationMatrix& target,
                                     bool transpose_variant = false);

// Rank reshuffling: per location, fresh marginal samples sorted descending are
// placed at the time stamps holding the matching descending rank of the input
// row. Ties break to the earlier time index. Marginals are matched exactly,
// rank order is preserved exactly.
TimeSeriesMatrix reshuffle(const TimeSeriesMatrix& series, const MarginalSet& samplers,
                           std::uint64_t seed);
TimeSeriesMatrix reshuffle(const TimeSeriesMatrix& series, const MarginalModel& sampler,
                           std::uint64_t seed);

// Core of reshuffle with caller-provided fresh samples (one vector per
// location, each of length n; need not be sorted).
TimeSeriesMatrix reshuffle_with_samples(const TimeSeriesMatrix& series,
                                        const std::vector<std::vector<double>>& fresh);

}  // namespace genformer
