#include "genformer/marginals.hpp"

#include <algorithm>
#include <cmath>

#include "genformer/io.hpp"

namespace genformer {

MarginalModel MarginalModel::empirical(std::vector<double> samples) {
  if (samples.size() < 2) throw InsufficientData("empirical marginal: need at least 2 samples");
  for (double v : samples)
    if (!std::isfinite(v)) throw NonFiniteResult("empirical marginal: non-finite sample");
  std::sort(samples.begin(), samples.end());
  MarginalModel m;
  m.kind_ = MarginalKind::Empirical;
  m.samples_ = std::move(samples);
  return m;
}

MarginalModel MarginalModel::gamma(double shape, double rate) {
  if (!(shape > 0.0 && rate > 0.0))
    throw DomainError("gamma marginal: shape and rate must be positive");
  MarginalModel m;
  m.kind_ = MarginalKind::Gamma;
  m.shape_ = shape;
  m.rate_ = rate;
  return m;
}

MarginalModel MarginalModel::standard_gaussian() {
  MarginalModel m;
  m.kind_ = MarginalKind::StandardGaussian;
  return m;
}

double MarginalModel::cdf(double x) const {
  switch (kind_) {
    case MarginalKind::StandardGaussian:
      return gaussian_cdf(x);
    case MarginalKind::Gamma:
      return gamma_cdf(std::max(x, 0.0), shape_, rate_);
    case MarginalKind::Empirical: {
      const auto& s = samples_;
      const double np1 = static_cast<double>(s.size()) + 1.0;
      if (x <= s.front()) return 1.0 / np1;
      if (x >= s.back()) return static_cast<double>(s.size()) / np1;
      // rank of the last order statistic <= x, interpolated to the next one
      auto it = std::upper_bound(s.begin(), s.end(), x);
      std::size_t k = static_cast<std::size_t>(it - s.begin());  // s[k-1] <= x < s[k]
      double x_lo = s[k - 1];
      double x_hi = s[k];
      double frac = x_hi > x_lo ? (x - x_lo) / (x_hi - x_lo) : 0.0;
      return (static_cast<double>(k) + frac) / np1;
    }
  }
  throw DomainError("unreachable marginal kind");
}

double MarginalModel::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("marginal quantile: p must lie in (0, 1)");
  switch (kind_) {
    case MarginalKind::StandardGaussian:
      return gaussian_quantile(p);
    case MarginalKind::Gamma:
      return gamma_quantile(p, shape_, rate_);
    case MarginalKind::Empirical: {
      const auto& s = samples_;
      const double np1 = static_cast<double>(s.size()) + 1.0;
      double r = p * np1;  // rank coordinate in [1, n] after clamping
      if (r <= 1.0) return s.front();
      if (r >= static_cast<double>(s.size())) return s.back();
      std::size_t k = static_cast<std::size_t>(r);  // 1-based lower rank
      double frac = r - static_cast<double>(k);
      return s[k - 1] + frac * (s[k] - s[k - 1]);
    }
  }
  throw DomainError("unreachable marginal kind");
}

double MarginalModel::sample(Rng& rng) const {
  switch (kind_) {
    case MarginalKind::StandardGaussian:
      return rng.normal();
    case MarginalKind::Gamma:
      return rng.gamma(shape_, rate_);
    case MarginalKind::Empirical:
      return quantile(rng.uniform01());
  }
  throw DomainError("unreachable marginal kind");
}

void MarginalSet::save(const std::filesystem::path& json_path) const {
  nlohmann::json j;
  j["locations"] = nlohmann::json::array();
  int empirical_idx = 0;
  for (int i = 0; i < size(); ++i) {
    const MarginalModel& m = models_[i];
    nlohmann::json e;
    switch (m.kind()) {
      case MarginalKind::StandardGaussian:
        e["kind"] = "standard_gaussian";
        break;
      case MarginalKind::Gamma:
        e["kind"] = "gamma";
        e["shape"] = m.shape();
        e["rate"] = m.rate();
        break;
      case MarginalKind::Empirical: {
        e["kind"] = "empirical";
        std::string blob = "marginal_samples_" + std::to_string(empirical_idx++) + ".bin";
        e["samples"] = blob;
        e["n"] = m.samples().size();
        io::write_binary_atomic(json_path.parent_path() / blob, m.samples().data(),
                                m.samples().size() * sizeof(double));
        break;
      }
    }
    j["locations"].push_back(e);
  }
  io::write_json_atomic(json_path, j);
}

MarginalSet MarginalSet::load(const std::filesystem::path& json_path) {
  nlohmann::json j = io::read_json(json_path);
  std::vector<MarginalModel> models;
  for (const auto& e : j.at("locations")) {
    std::string kind = e.at("kind");
    if (kind == "standard_gaussian") {
      models.push_back(MarginalModel::standard_gaussian());
    } else if (kind == "gamma") {
      models.push_back(MarginalModel::gamma(e.at("shape"), e.at("rate")));
    } else if (kind == "empirical") {
      auto samples = io::read_double_blob(json_path.parent_path() / e.at("samples"));
      models.push_back(MarginalModel::empirical(std::move(samples)));
    } else {
      throw IoError("unknown marginal kind: " + kind);
    }
  }
  return MarginalSet(std::move(models));
}

MarginalSet fit_empirical(const TimeSeriesMatrix& series) {
  if (series.space != Space::Physical)
    throw SpaceTagMismatch("fit_empirical: series must be in physical space");
  if (series.n < 2) throw InsufficientData("fit_empirical: need at least 2 stamps");
  std::vector<MarginalModel> models;
  models.reserve(series.m);
  for (int i = 0; i < series.m; ++i) {
    std::vector<double> row(series.row(i), series.row(i) + series.n);
    models.push_back(MarginalModel::empirical(std::move(row)));
  }
  return MarginalSet(std::move(models));
}

namespace {

// Parametric CDF values can round to 0 or 1 in double precision for extreme
// inputs; clamp before the probit so the transform stays finite.
constexpr double kCdfClamp = 1e-16;

void check_locations(const TimeSeriesMatrix& series, const MarginalSet& marginals,
                     const char* where) {
  if (marginals.size() != series.m)
    throw ShapeMismatch(std::string(where) + ": marginal count != locations");
}

}  // namespace

TimeSeriesMatrix to_gaussian(const TimeSeriesMatrix& series, const MarginalSet& marginals) {
  if (series.space != Space::Physical)
    throw SpaceTagMismatch("to_gaussian: series must be in physical space");
  check_locations(series, marginals, "to_gaussian");
  TimeSeriesMatrix out = series;
  out.space = Space::Gaussian;
  for (int i = 0; i < series.m; ++i) {
    const MarginalModel& F = marginals.at(i);
    if (F.kind() == MarginalKind::StandardGaussian) continue;  // identity map
    double* row = out.row(i);
    for (int j = 0; j < series.n; ++j) {
      double p = F.cdf(row[j]);
      p = std::min(std::max(p, kCdfClamp), 1.0 - kCdfClamp);
      double z = gaussian_quantile(p);
      if (!std::isfinite(z)) throw NonFiniteResult("to_gaussian: non-finite transform");
      row[j] = z;
    }
  }
  return out;
}

TimeSeriesMatrix from_gaussian(const TimeSeriesMatrix& series, const MarginalSet& marginals) {
  if (series.space != Space::Gaussian)
    throw SpaceTagMismatch("from_gaussian: series must be in Gaussian space");
  check_locations(series, marginals, "from_gaussian");
  TimeSeriesMatrix out = series;
  out.space = Space::Physical;
  for (int i = 0; i < series.m; ++i) {
    const MarginalModel& F = marginals.at(i);
    if (F.kind() == MarginalKind::StandardGaussian) continue;
    double* row = out.row(i);
    for (int j = 0; j < series.n; ++j) {
      double p = gaussian_cdf(row[j]);
      p = std::min(std::max(p, kCdfClamp), 1.0 - kCdfClamp);
      double x = F.quantile(p);
      if (!std::isfinite(x)) throw NonFiniteResult("from_gaussian: non-finite transform");
      row[j] = x;
    }
  }
  return out;
}

}  // namespace genformer
