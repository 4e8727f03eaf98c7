#include "genformer/baseline.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "genformer/dataset.hpp"
#include "genformer/rng.hpp"

namespace genformer {

TranslationModel fit_translation(const std::vector<TimeSeriesMatrix>& gaussian_obs,
                                 const MarginalSet& marginals, int tau_max) {
  if (gaussian_obs.empty()) throw EmptyInput("fit_translation: no observations");
  const int m = gaussian_obs.front().m;
  if (marginals.size() != m) throw ShapeMismatch("fit_translation: marginal count != locations");
  for (const auto& obs : gaussian_obs) {
    if (obs.space != Space::Gaussian)
      throw SpaceTagMismatch("fit_translation: observations must be in Gaussian space");
    if (obs.m != m) throw ShapeMismatch("fit_translation: mismatched location counts");
    if (obs.n <= tau_max)
      throw SeriesTooShort("fit_translation: realizations must exceed tau_max stamps");
  }

  TranslationModel model;
  model.tau_max = tau_max;
  model.marginals = marginals;
  model.spatial = spatial_correlation(concat_realizations(gaussian_obs));

  model.autocorr.assign(m, std::vector<double>(tau_max + 1, 0.0));
  for (int i = 0; i < m; ++i) {
    for (int tau = 0; tau <= tau_max; ++tau) {
      double acc = 0.0;
      std::int64_t count = 0;
      for (const auto& obs : gaussian_obs) {
        const double* row = obs.row(i);
        for (int j = 0; j + tau < obs.n; ++j) {
          acc += row[j] * row[j + tau];
          ++count;
        }
      }
      model.autocorr[i][tau] = acc / static_cast<double>(count);
    }
    const double lag0 = model.autocorr[i][0];
    if (!(lag0 > 0.0)) throw DomainError("fit_translation: zero lag-0 autocovariance");
    for (double& v : model.autocorr[i]) v /= lag0;
  }
  return model;
}

std::vector<TimeSeriesMatrix> simulate_translation(const TranslationModel& model, int n_steps,
                                                   int n_realizations,
                                                   const TimeStampVector& stamps,
                                                   std::uint64_t seed) {
  const int m = model.spatial.m;
  if (stamps.size() != n_steps) throw ShapeMismatch("simulate_translation: stamps length != n");
  const std::int64_t dim = static_cast<std::int64_t>(m) * n_steps;
  if (dim > 5000)
    throw CovarianceTooLarge("simulate_translation: m * n_steps exceeds the dense guard (5000)");

  // Location-averaged temporal kernel, zero beyond tau_max. A cosine taper
  // over the last quarter of the lag window removes the cutoff discontinuity,
  // which would otherwise push large negative eigenvalues into the assembled
  // covariance.
  std::vector<double> rho_bar(n_steps, 0.0);
  const double taper_start = 0.75 * model.tau_max;
  for (int tau = 0; tau < n_steps; ++tau) {
    if (tau <= model.tau_max) {
      double acc = 0.0;
      for (int i = 0; i < m; ++i) acc += model.autocorr[i][tau];
      double w = 1.0;
      if (tau > taper_start && model.tau_max > taper_start) {
        double u = (tau - taper_start) / (model.tau_max - taper_start);
        w = 0.5 * (1.0 + std::cos(M_PI * u));
      }
      rho_bar[tau] = w * acc / m;
    }
  }

  // Dense separable covariance, index (i, s) -> i * n_steps + s.
  Eigen::MatrixXd sigma(dim, dim);
  for (int i = 0; i < m; ++i)
    for (int s = 0; s < n_steps; ++s)
      for (int k = 0; k < m; ++k)
        for (int u = 0; u < n_steps; ++u)
          sigma(i * n_steps + s, k * n_steps + u) =
              model.spatial.at(i, k) * rho_bar[std::abs(s - u)];

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
  if (eig.info() != Eigen::Success)
    throw RepairFailed("simulate_translation: eigendecomposition failed");
  Eigen::VectorXd values = eig.eigenvalues();
  double clipped_sq = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values[i] < 0.0) {
      clipped_sq += values[i] * values[i];
      values[i] = 0.0;
    }
  }
  if (std::sqrt(clipped_sq) > 0.05 * sigma.norm())
    throw RepairFailed("simulate_translation: PSD repair would move the covariance by > 5%");

  Eigen::MatrixXd factor = eig.eigenvectors() * values.cwiseSqrt().asDiagonal();

  std::vector<TimeSeriesMatrix> out;
  out.reserve(n_realizations);
  Eigen::VectorXd xi(dim), g(dim);
  for (int r = 0; r < n_realizations; ++r) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(r)));
    for (Eigen::Index j = 0; j < dim; ++j) xi[j] = rng.normal();
    g = factor * xi;
    TimeSeriesMatrix gauss(m, n_steps, Space::Gaussian, stamps);
    for (int i = 0; i < m; ++i)
      for (int s = 0; s < n_steps; ++s) gauss.at(i, s) = g[i * n_steps + s];
    out.push_back(from_gaussian(gauss, model.marginals));
  }
  return out;
}

}  // namespace genformer
