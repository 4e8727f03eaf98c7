#pragma once

#include <functional>
#include <span>
#include <vector>

#include "genformer/postprocess.hpp"
#include "genformer/types.hpp"

namespace genformer {

// ||C - C_hat||_F / ||C||_F.
double frobenius_rel_error(const CorrelationMatrix& target, const CorrelationMatrix& estimate);

// Per-location autocovariance normalized by lag 0, pooled across realizations
// (lag pairs never cross realization boundaries). Result: m curves of length
// tau_max + 1.
std::vector<std::vector<double>> autocorr_curve(const std::vector<TimeSeriesMatrix>& series,
                                                int tau_max);

// Gaussian-kernel density estimate with the Silverman bandwidth, evaluated on
// the grid.
std::vector<double> kde_gaussian(std::vector<double> samples, const std::vector<double>& grid);

// Integral of |kde(samples) - ref| over the grid, normalized by the integral
// of ref (trapezoid rule).
double density_l1_error(const std::vector<double>& samples,
                        const std::function<double(double)>& ref_pdf,
                        const std::vector<double>& grid);

// p(s) = fraction of samples strictly above s, per grid point.
std::vector<double> exceedance_curve(std::span<const double> samples,
                                     const std::vector<double>& grid);

// Mean over grid points of |1/p_model - 1/p_target| / (1/p_target); points
// where either curve has no tail mass are dropped. Throws EmptyTailGrid when
// nothing remains.
double return_period_l1_error(const std::vector<double>& p_target,
                              const std::vector<double>& p_model);

// S(t) = sum_i V_i(t), pooled across realizations and time stamps.
std::vector<double> sde_metric_S(const std::vector<TimeSeriesMatrix>& physical);

// max_i (time average of location i) for one realization.
double wind_metric_S(const TimeSeriesMatrix& physical);

std::vector<double> make_grid(double lo, double hi, double step);
double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace genformer
