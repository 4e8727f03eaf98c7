#include "genformer/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "genformer/special.hpp"

namespace genformer {

double frobenius_rel_error(const CorrelationMatrix& target, const CorrelationMatrix& estimate) {
  if (target.m != estimate.m) throw ShapeMismatch("frobenius_rel_error: shape mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < target.a.size(); ++i) {
    const double d = target.a[i] - estimate.a[i];
    num += d * d;
    den += target.a[i] * target.a[i];
  }
  if (den == 0.0) throw ZeroTarget("frobenius_rel_error: target has zero norm");
  return std::sqrt(num / den);
}

std::vector<std::vector<double>> autocorr_curve(const std::vector<TimeSeriesMatrix>& series,
                                                int tau_max) {
  if (series.empty()) throw EmptySeries("autocorr_curve: no realizations");
  const int m = series.front().m;
  for (const auto& s : series) {
    if (s.m != m) throw ShapeMismatch("autocorr_curve: mismatched location counts");
    if (s.n <= tau_max) throw SeriesTooShort("autocorr_curve: realization shorter than tau_max");
  }

  // Pooled mean per location first; autocovariance is computed around it.
  std::vector<double> mean(m, 0.0);
  std::int64_t total = 0;
  for (const auto& s : series) {
    for (int i = 0; i < m; ++i) {
      const double* row = s.row(i);
      for (int j = 0; j < s.n; ++j) mean[i] += row[j];
    }
    total += s.n;
  }
  for (double& v : mean) v /= static_cast<double>(total);

  std::vector<std::vector<double>> curves(m, std::vector<double>(tau_max + 1, 0.0));
  for (int i = 0; i < m; ++i) {
    for (int tau = 0; tau <= tau_max; ++tau) {
      double acc = 0.0;
      std::int64_t count = 0;
      for (const auto& s : series) {
        const double* row = s.row(i);
        for (int j = 0; j + tau < s.n; ++j) {
          acc += (row[j] - mean[i]) * (row[j + tau] - mean[i]);
          ++count;
        }
      }
      curves[i][tau] = acc / static_cast<double>(count);
    }
    const double lag0 = curves[i][0];
    if (!(lag0 > 0.0)) throw DomainError("autocorr_curve: zero variance at location");
    for (double& v : curves[i]) v /= lag0;
  }
  return curves;
}

std::vector<double> kde_gaussian(std::vector<double> samples, const std::vector<double>& grid) {
  if (samples.size() < 2) throw EmptyInput("kde_gaussian: need at least 2 samples");
  const double n = static_cast<double>(samples.size());

  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : samples) var += (x - mean) * (x - mean);
  var /= n - 1.0;
  std::sort(samples.begin(), samples.end());
  const double q1 = samples[static_cast<std::size_t>(0.25 * (n - 1))];
  const double q3 = samples[static_cast<std::size_t>(0.75 * (n - 1))];
  const double sigma = std::sqrt(var);
  const double a = std::min(sigma, (q3 - q1) / 1.34);
  double h = 0.9 * a * std::pow(n, -0.2);
  if (!(h > 0.0)) h = std::max(sigma, 1e-12) * std::pow(n, -0.2);

  // Sorted samples let each grid point see only the +-8h window.
  const double cutoff = 8.0 * h;
  const double norm = 1.0 / (n * h * std::sqrt(2.0 * M_PI));
  std::vector<double> density(grid.size(), 0.0);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double x = grid[g];
    auto lo = std::lower_bound(samples.begin(), samples.end(), x - cutoff);
    auto hi = std::upper_bound(samples.begin(), samples.end(), x + cutoff);
    double acc = 0.0;
    for (auto it = lo; it != hi; ++it) {
      const double u = (x - *it) / h;
      acc += std::exp(-0.5 * u * u);
    }
    density[g] = norm * acc;
  }
  return density;
}

double density_l1_error(const std::vector<double>& samples,
                        const std::function<double(double)>& ref_pdf,
                        const std::vector<double>& grid) {
  if (grid.size() < 2) throw DomainError("density_l1_error: grid needs at least 2 points");
  auto kde = kde_gaussian(samples, grid);
  double num = 0.0, den = 0.0;
  for (std::size_t g = 1; g < grid.size(); ++g) {
    const double w = grid[g] - grid[g - 1];
    const double d0 = std::abs(kde[g - 1] - ref_pdf(grid[g - 1]));
    const double d1 = std::abs(kde[g] - ref_pdf(grid[g]));
    num += 0.5 * w * (d0 + d1);
    den += 0.5 * w * (ref_pdf(grid[g - 1]) + ref_pdf(grid[g]));
  }
  if (den == 0.0) throw ZeroTarget("density_l1_error: reference density has zero mass on grid");
  return num / den;
}

std::vector<double> exceedance_curve(std::span<const double> samples,
                                     const std::vector<double>& grid) {
  if (samples.empty()) throw EmptyInput("exceedance_curve: no samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> p(grid.size());
  const double n = static_cast<double>(sorted.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    auto it = std::upper_bound(sorted.begin(), sorted.end(), grid[g]);
    p[g] = static_cast<double>(sorted.end() - it) / n;
  }
  return p;
}

double return_period_l1_error(const std::vector<double>& p_target,
                              const std::vector<double>& p_model) {
  if (p_target.size() != p_model.size())
    throw ShapeMismatch("return_period_l1_error: curves differ in length");
  double acc = 0.0;
  int used = 0;
  for (std::size_t g = 0; g < p_target.size(); ++g) {
    if (p_target[g] <= 0.0 || p_model[g] <= 0.0) continue;
    const double rt = 1.0 / p_target[g];
    const double rm = 1.0 / p_model[g];
    acc += std::abs(rm - rt) / rt;
    ++used;
  }
  if (used == 0) throw EmptyTailGrid("return_period_l1_error: no common tail support");
  return acc / used;
}

std::vector<double> sde_metric_S(const std::vector<TimeSeriesMatrix>& physical) {
  if (physical.empty()) throw EmptySeries("sde_metric_S: no realizations");
  std::vector<double> out;
  for (const auto& s : physical) {
    if (s.space != Space::Physical)
      throw SpaceTagMismatch("sde_metric_S: series must be in physical space");
    for (int j = 0; j < s.n; ++j) {
      double total = 0.0;
      for (int i = 0; i < s.m; ++i) total += s.at(i, j);
      out.push_back(total);
    }
  }
  return out;
}

double wind_metric_S(const TimeSeriesMatrix& physical) {
  if (physical.space != Space::Physical)
    throw SpaceTagMismatch("wind_metric_S: series must be in physical space");
  if (physical.n == 0) throw EmptySeries("wind_metric_S: empty series");
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < physical.m; ++i) {
    double acc = 0.0;
    const double* row = physical.row(i);
    for (int j = 0; j < physical.n; ++j) acc += row[j];
    best = std::max(best, acc / physical.n);
  }
  return best;
}

std::vector<double> make_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw DomainError("make_grid: bad range");
  std::vector<double> grid;
  for (double x = lo; x <= hi + 1e-12 * step; x += step) grid.push_back(x);
  return grid;
}

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2)
    throw ShapeMismatch("pearson_correlation: need two equal-length vectors");
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(a.size());
  mb /= static_cast<double>(a.size());
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    da += (a[i] - ma) * (a[i] - ma);
    db += (b[i] - mb) * (b[i] - mb);
  }
  if (da == 0.0 || db == 0.0) throw DomainError("pearson_correlation: zero variance input");
  return num / std::sqrt(da * db);
}

}  // namespace genformer
