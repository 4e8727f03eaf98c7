#include "genformer/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "genformer/errors.hpp"

namespace genformer {

double gaussian_cdf(double x) {
  // erfc keeps full precision in the lower tail; the upper tail saturates at 1.
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double gaussian_pdf(double x) {
  static const double inv_sqrt_2pi = 0.3989422804014326779;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

namespace {

// Acklam's rational approximation for the probit function, ~1e-9 relative.
double probit_approx(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double q = p - 0.5;
  double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double gaussian_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("gaussian_quantile: p must lie in (0, 1)");
  double x = probit_approx(p);
  // Two Halley refinements take the rational start to machine accuracy.
  for (int it = 0; it < 2; ++it) {
    double f = gaussian_cdf(x) - p;
    double pdf = gaussian_pdf(x);
    if (pdf <= 0.0) break;
    double u = f / pdf;
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

namespace {

double lower_gamma_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double term = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double upper_gamma_contfrac(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double regularized_lower_gamma(double a, double x) {
  if (!(a > 0.0)) throw DomainError("regularized_lower_gamma: shape must be positive");
  if (x < 0.0) throw DomainError("regularized_lower_gamma: x must be nonnegative");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return lower_gamma_series(a, x);
  return 1.0 - upper_gamma_contfrac(a, x);
}

double gamma_cdf(double x, double shape, double rate) {
  if (!(shape > 0.0 && rate > 0.0)) throw DomainError("gamma_cdf: shape and rate must be positive");
  if (x < 0.0) throw DomainError("gamma_cdf: x must be nonnegative");
  return regularized_lower_gamma(shape, rate * x);
}

double gamma_pdf(double x, double shape, double rate) {
  if (!(shape > 0.0 && rate > 0.0)) throw DomainError("gamma_pdf: shape and rate must be positive");
  if (x < 0.0) return 0.0;
  if (x == 0.0) return shape < 1.0 ? std::numeric_limits<double>::infinity()
                                   : (shape == 1.0 ? rate : 0.0);
  return std::exp(shape * std::log(rate) + (shape - 1.0) * std::log(x) - rate * x -
                  std::lgamma(shape));
}

double gamma_quantile(double p, double shape, double rate) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("gamma_quantile: p must lie in (0, 1)");
  if (!(shape > 0.0 && rate > 0.0))
    throw DomainError("gamma_quantile: shape and rate must be positive");

  // Bracket the root, then bisect with periodic Newton polish.
  double lo = 0.0;
  double hi = std::max(1.0, (shape + 5.0 * std::sqrt(shape)) / rate);
  while (gamma_cdf(hi, shape, rate) < p) {
    hi *= 2.0;
    if (hi > 1e300) throw DomainError("gamma_quantile: failed to bracket");
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    double f = gamma_cdf(x, shape, rate) - p;
    if (f > 0.0)
      hi = x;
    else
      lo = x;
    double pdf = gamma_pdf(x, shape, rate);
    double x_new = x;
    if (pdf > 0.0 && std::isfinite(pdf)) {
      x_new = x - f / pdf;
    }
    if (!(x_new > lo && x_new < hi)) x_new = 0.5 * (lo + hi);
    if (std::abs(x_new - x) <= 1e-15 * std::max(1.0, x)) {
      x = x_new;
      break;
    }
    x = x_new;
  }
  return x;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw EmptyInput("ks_statistic: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double f = cdf(samples[i]);
    d = std::max(d, f - static_cast<double>(i) / n);
    d = std::max(d, static_cast<double>(i + 1) / n - f);
  }
  return d;
}

double ks_critical_value(double alpha, std::size_t n) {
  // Asymptotic Kolmogorov quantile with the Stephens small-sample correction.
  double k_alpha;
  if (alpha == 0.05)
    k_alpha = 1.3581;
  else if (alpha == 0.01)
    k_alpha = 1.6276;
  else
    k_alpha = std::sqrt(-0.5 * std::log(alpha / 2.0));
  double sn = std::sqrt(static_cast<double>(n));
  return k_alpha / (sn + 0.12 + 0.11 / sn);
}

}  // namespace genformer
