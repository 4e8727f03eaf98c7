#pragma once

#include <filesystem>
#include <vector>

#include "genformer/rng.hpp"
#include "genformer/special.hpp"
#include "genformer/types.hpp"

namespace genformer {

enum class MarginalKind { Empirical, Gamma, StandardGaussian };

// Per-location marginal distribution. Empirical marginals use the rank-based
// estimator F(x) = rank / (n + 1) with linear interpolation between order
// statistics, clamped to [1/(n+1), n/(n+1)] so the probit transform stays
// finite.
class MarginalModel {
 public:
  static MarginalModel empirical(std::vector<double> samples);
  static MarginalModel gamma(double shape, double rate);
  static MarginalModel standard_gaussian();

  MarginalKind kind() const { return kind_; }
  double shape() const { return shape_; }
  double rate() const { return rate_; }
  const std::vector<double>& samples() const { return samples_; }

  double cdf(double x) const;
  double quantile(double p) const;
  double sample(Rng& rng) const;

 private:
  MarginalKind kind_ = MarginalKind::StandardGaussian;
  double shape_ = 0.0;
  double rate_ = 0.0;
  std::vector<double> samples_;  // sorted ascending
};

// One marginal per location.
class MarginalSet {
 public:
  MarginalSet() = default;
  explicit MarginalSet(std::vector<MarginalModel> models) : models_(std::move(models)) {}

  int size() const { return static_cast<int>(models_.size()); }
  const MarginalModel& at(int i) const { return models_[i]; }

  // JSON manifest next to one raw sample blob per empirical marginal.
  void save(const std::filesystem::path& json_path) const;
  static MarginalSet load(const std::filesystem::path& json_path);

 private:
  std::vector<MarginalModel> models_;
};

// Fits empirical marginals per location. Requires Physical space and n >= 2.
MarginalSet fit_empirical(const TimeSeriesMatrix& series);

// Entrywise Phi^-1(F_i(x)) / F_i^-1(Phi(x)); flips the space tag.
TimeSeriesMatrix to_gaussian(const TimeSeriesMatrix& series, const MarginalSet& marginals);
TimeSeriesMatrix from_gaussian(const TimeSeriesMatrix& series, const MarginalSet& marginals);

}  // namespace genformer
