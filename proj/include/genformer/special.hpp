#pragma once

#include <functional>
#include <vector>

namespace genformer {

// Standard Gaussian CDF Phi(x), accurate over the full double range.
double gaussian_cdf(double x);

// Inverse of gaussian_cdf. Requires 0 < p < 1; |Phi(Phi^-1(p)) - p| < 1e-12.
double gaussian_quantile(double p);

// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double regularized_lower_gamma(double a, double x);

// CDF / quantile of Gamma(shape, rate). gamma_cdf requires x >= 0.
double gamma_cdf(double x, double shape, double rate);
double gamma_quantile(double p, double shape, double rate);

// Gamma(shape, rate) density, used by density diagnostics.
double gamma_pdf(double x, double shape, double rate);
double gaussian_pdf(double x);

// Two-sided Kolmogorov-Smirnov statistic of a sample against a continuous CDF.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

// Approximate critical value of the KS statistic at the given significance.
double ks_critical_value(double alpha, std::size_t n);

}  // namespace genformer
