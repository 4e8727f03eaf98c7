#pragma once

#include <cstdint>
#include <vector>

#include "genformer/marginals.hpp"
#include "genformer/postprocess.hpp"
#include "genformer/types.hpp"

namespace genformer {

// Translation-process baseline: a Gaussian process matched to the observed
// second-moment properties, mapped through the marginal inverses.
struct TranslationModel {
  CorrelationMatrix spatial;                  // m x m
  std::vector<std::vector<double>> autocorr;  // per location, lags 0..tau_max
  MarginalSet marginals;                      // applied location-wise on output
  int tau_max = 0;
};

// Estimates the spatial correlation and per-location autocorrelation from
// Gaussian-space observations; lags never cross realization boundaries.
TranslationModel fit_translation(const std::vector<TimeSeriesMatrix>& gaussian_obs,
                                 const MarginalSet& marginals, int tau_max);

// Assembles the dense mn x mn separable space-time covariance
// Sigma[(i,s),(k,u)] = C[i,k] * rho_bar(|s-u|), repairs it to PSD by
// eigenvalue clipping, and samples realizations by dense factor-multiply.
// Guarded at m * n_steps <= 5000. Output is in Physical space.
std::vector<TimeSeriesMatrix> simulate_translation(const TranslationModel& model, int n_steps,
                                                   int n_realizations,
                                                   const TimeStampVector& stamps,
                                                   std::uint64_t seed);

}  // namespace genformer
