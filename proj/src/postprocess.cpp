#include "genformer/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace genformer {

void CorrelationMatrix::validate_symmetry() const {
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  const double tol = 1e-12 * std::max(1.0, scale);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      if (std::abs(at(i, j) - at(j, i)) > tol)
        throw DomainError("CorrelationMatrix: not symmetric");
}

CorrelationMatrix spatial_correlation(const TimeSeriesMatrix& series) {
  if (series.n == 0 || series.m == 0) throw EmptySeries("spatial_correlation: empty series");
  if (series.space != Space::Gaussian)
    throw SpaceTagMismatch("spatial_correlation: series must be in Gaussian space");
  CorrelationMatrix c(series.m);
  for (int i = 0; i < series.m; ++i) {
    const double* xi = series.row(i);
    for (int k = i; k < series.m; ++k) {
      const double* xk = series.row(k);
      double acc = 0.0;
      for (int j = 0; j < series.n; ++j) acc += xi[j] * xk[j];
      acc /= static_cast<double>(series.n);
      c.at(i, k) = acc;
      c.at(k, i) = acc;
    }
  }
  return c;
}

namespace {

CholeskyFactor cholesky_attempt(const CorrelationMatrix& c, double jitter, bool& failed) {
  const int m = c.m;
  CholeskyFactor f;
  f.m = m;
  f.lower.assign(static_cast<std::size_t>(m) * m, 0.0);
  failed = false;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j <= i; ++j) {
      double acc = c.at(i, j);
      if (i == j) acc += jitter;
      for (int k = 0; k < j; ++k) acc -= f.at(i, k) * f.at(j, k);
      if (i == j) {
        if (acc < -1e-8) throw NotPsd("cholesky: negative pivot");
        if (acc <= 0.0) {
          failed = true;
          return f;
        }
        f.lower[static_cast<std::size_t>(i) * m + j] = std::sqrt(acc);
      } else {
        f.lower[static_cast<std::size_t>(i) * m + j] =
            acc / f.at(j, j);
      }
    }
  }
  return f;
}

}  // namespace

CholeskyFactor cholesky(const CorrelationMatrix& c) {
  c.validate_symmetry();
  bool failed = false;
  CholeskyFactor f = cholesky_attempt(c, 0.0, failed);
  if (failed) f = cholesky_attempt(c, 1e-10, failed);
  if (failed) throw NotPsd("cholesky: zero pivot persists after jitter");
  return f;
}

TimeSeriesMatrix correlation_correct(const TimeSeriesMatrix& series,
                                     const CorrelationMatrix& target, bool transpose_variant) {
  if (series.space != Space::Gaussian)
    throw SpaceTagMismatch("correlation_correct: series must be in Gaussian space");
  if (target.m != series.m) throw ShapeMismatch("correlation_correct: dimension mismatch");

  const int m = series.m;
  CorrelationMatrix sample = spatial_correlation(series);
  sample.validate_symmetry();
  bool failed = false;
  CholeskyFactor l_sample = cholesky_attempt(sample, 0.0, failed);
  double scale = 0.0;
  for (int i = 0; i < m; ++i) scale = std::max(scale, sample.at(i, i));
  if (!failed)
    for (int i = 0; i < m; ++i)
      if (l_sample.at(i, i) <= 1e-9 * std::sqrt(std::max(scale, 1e-300))) failed = true;
  if (failed)
    throw SingularSampleCorrelation("correlation_correct: sample correlation is singular");
  CholeskyFactor l_target = cholesky(target);

  // T = L Ltilde^-1 (or L Ltilde^T), applied columnwise.
  std::vector<double> transform(static_cast<std::size_t>(m) * m, 0.0);
  if (transpose_variant) {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        double acc = 0.0;
        for (int k = 0; k < m; ++k) acc += l_target.at(i, k) * l_sample.at(j, k);
        transform[static_cast<std::size_t>(i) * m + j] = acc;
      }
  } else {
    // Columns of Ltilde^-1 by forward substitution.
    std::vector<double> inv(static_cast<std::size_t>(m) * m, 0.0);
    for (int col = 0; col < m; ++col) {
      for (int i = col; i < m; ++i) {
        double acc = i == col ? 1.0 : 0.0;
        for (int k = col; k < i; ++k) acc -= l_sample.at(i, k) * inv[static_cast<std::size_t>(k) * m + col];
        inv[static_cast<std::size_t>(i) * m + col] = acc / l_sample.at(i, i);
      }
    }
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        double acc = 0.0;
        for (int k = 0; k < m; ++k)
          acc += l_target.at(i, k) * inv[static_cast<std::size_t>(k) * m + j];
        transform[static_cast<std::size_t>(i) * m + j] = acc;
      }
  }

  TimeSeriesMatrix out(m, series.n, Space::Gaussian, series.stamps);
  for (int i = 0; i < m; ++i) {
    double* dst = out.row(i);
    for (int k = 0; k < m; ++k) {
      double t = transform[static_cast<std::size_t>(i) * m + k];
      if (t == 0.0) continue;
      const double* src = series.row(k);
      for (int j = 0; j < series.n; ++j) dst[j] += t * src[j];
    }
  }
  return out;
}

TimeSeriesMatrix reshuffle_with_samples(const TimeSeriesMatrix& series,
                                        const std::vector<std::vector<double>>& fresh) {
  if (static_cast<int>(fresh.size()) != series.m)
    throw ShapeMismatch("reshuffle: need one sample vector per location");
  const int n = series.n;
  TimeSeriesMatrix out = series;
  std::vector<int> order(n);
  for (int i = 0; i < series.m; ++i) {
    if (static_cast<int>(fresh[i].size()) != n)
      throw ShapeMismatch("reshuffle: sample vector length != n");
    std::vector<double> z = fresh[i];
    std::sort(z.begin(), z.end(), std::greater<double>());

    // Descending ranks of the input row; stable sort breaks ties by earlier
    // time index.
    const double* u = series.row(i);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return u[a] > u[b]; });
    double* dst = out.row(i);
    for (int r = 0; r < n; ++r) dst[order[r]] = z[r];
  }
  return out;
}

TimeSeriesMatrix reshuffle(const TimeSeriesMatrix& series, const MarginalSet& samplers,
                           std::uint64_t seed) {
  if (samplers.size() != series.m)
    throw ShapeMismatch("reshuffle: need one sampler per location");
  std::vector<std::vector<double>> fresh(series.m);
  for (int i = 0; i < series.m; ++i) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(i)));
    fresh[i].resize(series.n);
    for (int j = 0; j < series.n; ++j) fresh[i][j] = samplers.at(i).sample(rng);
  }
  return reshuffle_with_samples(series, fresh);
}

TimeSeriesMatrix reshuffle(const TimeSeriesMatrix& series, const MarginalModel& sampler,
                           std::uint64_t seed) {
  std::vector<MarginalModel> models(series.m, sampler);
  return reshuffle(series, MarginalSet(std::move(models)), seed);
}

}  // namespace genformer
