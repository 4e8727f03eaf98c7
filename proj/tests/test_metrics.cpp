#include <doctest.h>

#include <cmath>

#include "genformer/metrics.hpp"
#include "genformer/rng.hpp"
#include "genformer/special.hpp"
#include "genformer/windprep.hpp"

#include "testutil.hpp"

using namespace genformer;

TEST_SUITE("metrics") {

TEST_CASE("frobenius relative error handles the worked cases") {
  CorrelationMatrix a(2), b(2);
  a.at(0, 0) = a.at(1, 1) = 1.0;
  b = a;
  CHECK(frobenius_rel_error(a, b) == 0.0);
  b.at(0, 0) = b.at(1, 1) = 2.0;
  CHECK(frobenius_rel_error(a, b) == doctest::Approx(1.0).epsilon(1e-12));
  CorrelationMatrix zero(2);
  CHECK_THROWS_AS(frobenius_rel_error(zero, a), ZeroTarget);
}

TEST_CASE("white-noise autocorrelation is one at lag zero and small after") {
  Rng rng(201);
  std::vector<TimeSeriesMatrix> series;
  TimeSeriesMatrix s(1, 20000, Space::Gaussian, TimeStampVector::uniform(0.0, 1.0, 20000));
  for (double& v : s.data) v = rng.normal();
  series.push_back(std::move(s));
  auto curves = autocorr_curve(series, 5);
  CHECK(curves[0][0] == 1.0);
  for (int tau = 1; tau <= 5; ++tau) CHECK(std::abs(curves[0][tau]) < 0.03);
  CHECK_THROWS_AS(autocorr_curve(series, 30000), SeriesTooShort);
}

TEST_CASE("KDE of a large normal sample has small L1 error") {
  Rng rng(202);
  std::vector<double> samples(1000000);
  for (double& v : samples) v = rng.normal();
  auto grid = make_grid(-5.0, 5.0, 0.05);
  double err = density_l1_error(samples, [](double x) { return gaussian_pdf(x); }, grid);
  CHECK(err < 0.02);
}

TEST_CASE("exceedance of a uniform sample crosses one half at its median") {
  Rng rng(203);
  std::vector<double> samples(100000);
  for (double& v : samples) v = rng.uniform01();
  auto p = exceedance_curve(samples, {0.5});
  CHECK(std::abs(p[0] - 0.5) < 0.01);
}

TEST_CASE("all samples below the grid leave zero exceedance") {
  std::vector<double> samples = {0.1, 0.2, 0.3};
  auto p = exceedance_curve(samples, {0.05, 1.0});
  CHECK(p[0] == 1.0);
  CHECK(p[1] == 0.0);
}

TEST_CASE("return-period error drops zero-mass points and averages the rest") {
  std::vector<double> target = {0.5, 0.1, 0.0};
  std::vector<double> model = {0.25, 0.1, 0.2};
  // only the first two grid points carry mass in both curves
  double expected = 0.5 * (std::abs(4.0 - 2.0) / 2.0 + 0.0);
  CHECK(return_period_l1_error(target, model) == doctest::Approx(expected).epsilon(1e-12));
  CHECK_THROWS_AS(return_period_l1_error({0.0}, {0.5}), EmptyTailGrid);
}

TEST_CASE("the SDE metric pools the per-timestamp sums") {
  TimeSeriesMatrix s(3, 2, Space::Physical, TimeStampVector::uniform(0.0, 1.0, 2));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) s.at(i, j) = i + 1 + 10.0 * j;
  auto values = sde_metric_S({s});
  REQUIRE(values.size() == 2);
  CHECK(values[0] == 6.0);
  CHECK(values[1] == 36.0);

  TimeSeriesMatrix one(1, 2, Space::Physical, TimeStampVector::uniform(0.0, 1.0, 2));
  one.at(0, 0) = 4.0;
  one.at(0, 1) = 5.0;
  CHECK(sde_metric_S({one}) == std::vector<double>{4.0, 5.0});
}

TEST_CASE("sum of three gamma locations averages to six") {
  Rng rng(204);
  std::vector<TimeSeriesMatrix> series;
  TimeSeriesMatrix s(3, 30000, Space::Physical, TimeStampVector::uniform(0.0, 1.0, 30000));
  for (double& v : s.data) v = rng.gamma(2.0, 1.0);
  series.push_back(std::move(s));
  CHECK(std::abs(testutil::mean(sde_metric_S(series)) - 6.0) < 0.05);
}

TEST_CASE("the wind metric is the max of per-location time averages") {
  TimeSeriesMatrix s(2, 4, Space::Physical, TimeStampVector::uniform(0.0, 1.0, 4));
  for (int j = 0; j < 4; ++j) {
    s.at(0, j) = 2.0;
    s.at(1, j) = 5.0;
  }
  CHECK(wind_metric_S(s) == 5.0);
  s.space = Space::Gaussian;
  CHECK_THROWS_AS(wind_metric_S(s), SpaceTagMismatch);
}

TEST_CASE("wind preprocessing removes constants exactly") {
  std::vector<WindRow> rows;
  for (int h = 0; h < 24 * 10; ++h) {
    WindRow r;
    r.station_id = "A";
    r.stamp = calendar_from_hours(hours_since_epoch({2006, 1, 1, 0}) + h);
    r.wind_speed = 7.5;
    rows.push_back(r);
  }
  auto result = wind_preprocess(rows, 24);
  for (int j = 0; j < result.series.n; ++j)
    CHECK(result.series.at(0, j) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(result.record.hourly_means[0][0] == doctest::Approx(7.5));
}

TEST_CASE("a pure diurnal cycle is removed by the hourly means") {
  std::vector<WindRow> rows;
  for (int h = 0; h < 24 * 30; ++h) {
    WindRow r;
    r.station_id = "A";
    r.stamp = calendar_from_hours(hours_since_epoch({2006, 1, 1, 0}) + h);
    r.wind_speed = 3.0 + std::sin(2.0 * M_PI * (h % 24) / 24.0);
    rows.push_back(r);
  }
  auto result = wind_preprocess(rows, 48);
  for (int j = 0; j < result.series.n; ++j)
    CHECK(std::abs(result.series.at(0, j)) < 1e-10);
}

TEST_CASE("trend plus diurnal plus noise comes out mean-stationary") {
  Rng rng(205);
  std::vector<WindRow> rows;
  const int n = 24 * 120;
  for (int h = 0; h < n; ++h) {
    WindRow r;
    r.station_id = "A";
    r.stamp = calendar_from_hours(hours_since_epoch({2006, 1, 1, 0}) + h);
    r.wind_speed = 5.0 + 3.0 * h / n + std::sin(2.0 * M_PI * (h % 24) / 24.0) + 0.4 * rng.normal();
    rows.push_back(r);
  }
  auto result = wind_preprocess(rows, 720);
  // circular padding wraps the trend discontinuity into the outermost
  // half-window, so the stationarity claim concerns the interior
  const int edge = 360;
  const double* row = result.series.row(0);
  const int mid = n / 2;
  std::vector<double> first(row + edge, row + mid), second(row + mid, row + n - edge);
  double pooled_sd = std::sqrt(testutil::variance(first) / first.size() +
                               testutil::variance(second) / second.size());
  CHECK(std::abs(testutil::mean(first) - testutil::mean(second)) < 2.0 * pooled_sd + 0.05);
}

TEST_CASE("missing hours are zero-filled and counted") {
  std::vector<WindRow> rows;
  for (int h = 0; h < 48; ++h) {
    if (h == 10 || h == 20) continue;  // gaps
    WindRow r;
    r.station_id = "A";
    r.stamp = calendar_from_hours(hours_since_epoch({2006, 1, 1, 0}) + h);
    r.wind_speed = 1.0;
    rows.push_back(r);
  }
  auto result = wind_preprocess(rows, 12);
  CHECK(result.series.n == 48);
  CHECK(result.record.zero_filled[0] == 2);
}

TEST_CASE("misaligned stations are rejected") {
  std::vector<WindRow> rows;
  for (int h = 0; h < 24; ++h) {
    WindRow a{"A", calendar_from_hours(hours_since_epoch({2006, 1, 1, 0}) + h), 1.0};
    rows.push_back(a);
  }
  for (int h = 5; h < 24; ++h) {
    WindRow b{"B", calendar_from_hours(hours_since_epoch({2006, 1, 1, 0}) + h), 1.0};
    rows.push_back(b);
  }
  CHECK_THROWS_AS(wind_preprocess(rows, 12), MisalignedStations);
}

}  // TEST_SUITE
