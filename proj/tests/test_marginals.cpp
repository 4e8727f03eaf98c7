#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "genformer/marginals.hpp"
#include "genformer/rng.hpp"

#include "testutil.hpp"

using namespace genformer;

namespace {

TimeSeriesMatrix physical_series(const std::vector<std::vector<double>>& rows) {
  int m = static_cast<int>(rows.size());
  int n = static_cast<int>(rows[0].size());
  TimeSeriesMatrix s(m, n, Space::Physical, TimeStampVector::uniform(0.0, 1.0, n));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) s.at(i, j) = rows[i][j];
  return s;
}

// Median of Gamma(2,1) by bisection on the independent Erlang oracle.
double gamma21_median_oracle() {
  double lo = 0.0, hi = 10.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (testutil::erlang_cdf(mid, 2, 1.0) < 0.5)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("marginals") {

TEST_CASE("rank estimator puts the middle sample at one half") {
  auto model = MarginalModel::empirical({1.0, 2.0, 3.0});
  CHECK(model.cdf(2.0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("queries below the support clamp to 1/(n+1)") {
  auto model = MarginalModel::empirical({1.0, 2.0, 3.0});
  CHECK(model.cdf(0.0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(model.cdf(100.0) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("empirical CDF tracks the analytic gamma CDF") {
  Rng rng(21);
  std::vector<double> samples(10000);
  for (double& v : samples) v = rng.gamma(2.0, 1.0);
  auto model = MarginalModel::empirical(samples);
  double analytic = testutil::erlang_cdf(2.0, 2, 1.0);
  CHECK(analytic == doctest::Approx(0.594).epsilon(2e-3));
  CHECK(std::abs(model.cdf(2.0) - analytic) < 0.02);
}

TEST_CASE("empirical CDF never returns 0 or 1") {
  auto model = MarginalModel::empirical({-5.0, 1.0, 1.0, 8.0});
  for (double x : {-100.0, -5.0, 0.0, 1.0, 7.9999, 8.0, 1e9}) {
    CHECK(model.cdf(x) > 0.0);
    CHECK(model.cdf(x) < 1.0);
  }
}

TEST_CASE("gamma median maps to zero in Gaussian space") {
  double median = gamma21_median_oracle();
  CHECK(median == doctest::Approx(1.678).epsilon(1e-3));
  auto series = physical_series({{median}});
  MarginalSet set({MarginalModel::gamma(2.0, 1.0)});
  auto gauss = to_gaussian(series, set);
  CHECK(gauss.space == Space::Gaussian);
  CHECK(std::abs(gauss.at(0, 0)) < 1e-9);
}

TEST_CASE("standard-Gaussian marginals make the transform an identity") {
  auto series = physical_series({{-1.5, 0.0, 2.25}});
  MarginalSet set({MarginalModel::standard_gaussian()});
  auto gauss = to_gaussian(series, set);
  CHECK(gauss.data == series.data);
  CHECK(gauss.space == Space::Gaussian);
}

TEST_CASE("gamma transform round-trips to 1e-9") {
  Rng rng(22);
  std::vector<double> row(500);
  for (double& v : row) v = rng.gamma(2.0, 1.0);
  auto series = physical_series({row});
  MarginalSet set({MarginalModel::gamma(2.0, 1.0)});
  auto back = from_gaussian(to_gaussian(series, set), set);
  for (int j = 0; j < series.n; ++j)
    CHECK(back.at(0, j) == doctest::Approx(series.at(0, j)).epsilon(1e-9));
}

TEST_CASE("space tags are enforced at the boundary") {
  auto series = physical_series({{1.0, 2.0}});
  MarginalSet set({MarginalModel::gamma(2.0, 1.0)});
  CHECK_THROWS_AS(from_gaussian(series, set), SpaceTagMismatch);
  auto gauss = to_gaussian(series, set);
  CHECK_THROWS_AS(to_gaussian(gauss, set), SpaceTagMismatch);
}

TEST_CASE("gaussian quantile hits the 96% tail point") {
  CHECK(gaussian_quantile(0.96) == doctest::Approx(1.75).epsilon(1e-3));
  CHECK(gaussian_cdf(0.0) == 0.5);
}

TEST_CASE("gamma(1,1) CDF is the exponential law") {
  CHECK(gamma_cdf(1.0, 1.0, 1.0) == doctest::Approx(0.63212).epsilon(1e-5));
  for (double x : {0.1, 0.5, 2.0, 7.0})
    CHECK(gamma_cdf(x, 1.0, 1.0) == doctest::Approx(1.0 - std::exp(-x)).epsilon(1e-12));
}

TEST_CASE("gamma CDF agrees with the Erlang oracle at integer shapes") {
  for (int shape : {1, 2, 3, 5})
    for (double x : {0.05, 0.7, 1.3, 4.0, 9.0})
      CHECK(gamma_cdf(x, shape, 1.0) ==
            doctest::Approx(testutil::erlang_cdf(x, shape, 1.0)).epsilon(1e-12));
}

TEST_CASE("quantile and CDF are mutually consistent") {
  for (double p : {1e-10, 1e-6, 0.01, 0.3, 0.5, 0.77, 0.96, 0.9999, 1.0 - 1e-10}) {
    CHECK(std::abs(gaussian_cdf(gaussian_quantile(p)) - p) < 1e-12);
    CHECK(std::abs(gamma_cdf(gamma_quantile(p, 2.0, 1.0), 2.0, 1.0) - p) < 1e-10);
    CHECK(std::abs(gamma_cdf(gamma_quantile(p, 0.7, 3.0), 0.7, 3.0) - p) < 1e-10);
  }
}

TEST_CASE("CDFs and quantiles are monotone") {
  Rng rng(23);
  auto model = MarginalModel::empirical([&] {
    std::vector<double> v(200);
    for (double& x : v) x = rng.uniform(-4.0, 4.0);
    return v;
  }());
  double prev_grid = -6.0;
  double prev_cdf = 0.0;
  for (int k = 0; k < 300; ++k) {
    double x = prev_grid + rng.uniform(0.0, 0.08);
    double c = model.cdf(x);
    CHECK(c >= prev_cdf);
    prev_cdf = c;
    prev_grid = x;
  }
  double prev_q = -1e18;
  for (int k = 1; k < 100; ++k) {
    double q = model.quantile(k / 100.0);
    CHECK(q >= prev_q);
    prev_q = q;
  }
  for (int k = 1; k < 100; ++k) {
    CHECK(gaussian_quantile(k / 100.0) >= gaussian_quantile((k - 0.5) / 100.0));
    CHECK(gamma_quantile(k / 100.0, 2.0, 1.0) >= gamma_quantile((k - 0.5) / 100.0, 2.0, 1.0));
  }
}

TEST_CASE("transformed i.i.d. gamma samples pass a KS check against N(0,1)") {
  Rng rng(24);
  const int n = 20000;
  std::vector<double> row(n);
  for (double& v : row) v = rng.gamma(2.0, 1.0);
  auto series = physical_series({row});
  MarginalSet set({MarginalModel::gamma(2.0, 1.0)});
  auto gauss = to_gaussian(series, set);
  std::vector<double> sample(gauss.row(0), gauss.row(0) + n);
  double d = ks_statistic(sample, [](double x) { return gaussian_cdf(x); });
  CHECK(d < ks_critical_value(0.01, n));
}

TEST_CASE("empirical transform output stays finite at the extremes") {
  Rng rng(25);
  std::vector<double> row(512);
  for (double& v : row) v = rng.gamma(2.0, 1.0);
  auto series = physical_series({row});
  auto set = fit_empirical(series);
  auto gauss = to_gaussian(series, set);
  for (int j = 0; j < gauss.n; ++j) CHECK(std::isfinite(gauss.at(0, j)));
}

TEST_CASE("marginal sets round-trip through JSON") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "gf_test_marginals";
  fs::create_directories(dir);

  Rng rng(26);
  std::vector<double> samples(64);
  for (double& v : samples) v = rng.uniform(0.0, 5.0);
  MarginalSet set({MarginalModel::empirical(samples), MarginalModel::gamma(2.0, 1.0),
                   MarginalModel::standard_gaussian()});
  set.save(dir / "marginals.json");
  auto loaded = MarginalSet::load(dir / "marginals.json");
  REQUIRE(loaded.size() == 3);
  CHECK(loaded.at(0).samples() == set.at(0).samples());
  CHECK(loaded.at(1).shape() == 2.0);
  CHECK(loaded.at(2).kind() == MarginalKind::StandardGaussian);

  fs::remove_all(dir);
}

TEST_CASE("insufficient data is rejected") {
  CHECK_THROWS_AS(MarginalModel::empirical({1.0}), InsufficientData);
  auto one = physical_series({{1.0}});
  CHECK_THROWS_AS(fit_empirical(one), InsufficientData);
}

}  // TEST_SUITE
