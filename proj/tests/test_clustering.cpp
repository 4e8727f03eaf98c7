#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "genformer/clustering.hpp"
#include "genformer/rng.hpp"

using namespace genformer;

namespace {

TimeSeriesMatrix gaussian_series(int m, int n, Rng& rng) {
  TimeSeriesMatrix s(m, n, Space::Gaussian, TimeStampVector::uniform(0.0, 1.0, n));
  for (double& v : s.data) v = rng.normal();
  return s;
}

// Exact 1-D 2-means by exhaustive threshold search over sorted points.
std::pair<double, double> two_means_1d_oracle(std::vector<double> pts) {
  std::sort(pts.begin(), pts.end());
  const int n = static_cast<int>(pts.size());
  std::vector<double> prefix(n + 1, 0.0), prefix_sq(n + 1, 0.0);
  for (int i = 0; i < n; ++i) {
    prefix[i + 1] = prefix[i] + pts[i];
    prefix_sq[i + 1] = prefix_sq[i] + pts[i] * pts[i];
  }
  double best = 1e300;
  std::pair<double, double> centroids{0.0, 0.0};
  for (int split = 1; split < n; ++split) {
    double m1 = prefix[split] / split;
    double m2 = (prefix[n] - prefix[split]) / (n - split);
    double cost = prefix_sq[split] - split * m1 * m1 +
                  (prefix_sq[n] - prefix_sq[split]) - (n - split) * m2 * m2;
    if (cost < best) {
      best = cost;
      centroids = {m1, m2};
    }
  }
  return centroids;
}

}  // namespace

TEST_SUITE("clustering") {

TEST_CASE("well-separated points recover their modes with zero inertia") {
  std::vector<double> pts;
  for (int i = 0; i < 50; ++i) pts.push_back(0.0);
  for (int i = 0; i < 50; ++i) pts.push_back(10.0);
  auto result = kmeans(pts, 100, 1, 2, 4, 50, 42);
  CHECK(result.inertia == doctest::Approx(0.0));
  std::vector<double> c = result.centroids;
  std::sort(c.begin(), c.end());
  CHECK(c[0] == doctest::Approx(0.0));
  CHECK(c[1] == doctest::Approx(10.0));
}

TEST_CASE("k equal to the point count gives zero inertia") {
  std::vector<double> pts = {0.0, 1.0, 2.5, 7.0, -3.0};
  auto result = kmeans(pts, 5, 1, 5, 3, 50, 1);
  CHECK(result.inertia == doctest::Approx(0.0));
}

TEST_CASE("1-D bimodal clustering matches the exhaustive oracle") {
  Rng rng(31);
  std::vector<double> pts;
  for (int i = 0; i < 300; ++i) pts.push_back(2.0 + rng.normal());
  for (int i = 0; i < 300; ++i) pts.push_back(12.0 + rng.normal());
  auto result = kmeans(pts, 600, 1, 2, 8, 100, 9);
  auto [o1, o2] = two_means_1d_oracle(pts);
  std::vector<double> c = result.centroids;
  std::sort(c.begin(), c.end());
  CHECK(std::abs(c[0] - std::min(o1, o2)) < 0.5);
  CHECK(std::abs(c[1] - std::max(o1, o2)) < 0.5);
  CHECK(std::abs(c[0] - 2.0) < 0.5);
  CHECK(std::abs(c[1] - 12.0) < 0.5);
}

TEST_CASE("restart selection is deterministic given the seed") {
  Rng rng(32);
  std::vector<double> pts;
  for (int i = 0; i < 400; ++i) pts.push_back(rng.uniform(-4.0, 4.0));
  auto a = kmeans(pts, 200, 2, 7, 10, 60, 777);
  auto b = kmeans(pts, 200, 2, 7, 10, 60, 777);
  CHECK(a.centroids == b.centroids);
  CHECK(a.assignment == b.assignment);
  CHECK(a.inertia == b.inertia);
}

TEST_CASE("inertia trace is non-increasing") {
  Rng rng(33);
  std::vector<double> pts;
  for (int i = 0; i < 600; ++i) pts.push_back(rng.uniform(-1.0, 1.0));
  auto result = kmeans(pts, 300, 2, 6, 1, 80, 5);
  for (std::size_t i = 1; i < result.inertia_trace.size(); ++i)
    CHECK(result.inertia_trace[i] <= result.inertia_trace[i - 1] * (1.0 + 1e-12) + 1e-9);
}

TEST_CASE("k larger than the distinct point count is rejected") {
  std::vector<double> pts = {1.0, 1.0, 1.0, 2.0};
  CHECK_THROWS_AS(kmeans(pts, 4, 1, 3, 2, 10, 0), KTooLarge);
  CHECK_THROWS_AS(kmeans({}, 0, 1, 1, 2, 10, 0), EmptyInput);
}

TEST_CASE("tail and bulk regions are clustered separately") {
  Rng rng(34);
  auto series = gaussian_series(3, 5000, rng);
  auto spec = TailRegionSpec::at_level(0.96);
  CHECK(spec.threshold == doctest::Approx(1.75).epsilon(1e-3));
  auto model = fit_state_space(series, spec, 4, 8, 2, 50, 99);
  CHECK(model.n_clusters() == 12);
  CHECK(model.n_tail == 4);
  for (int c = 0; c < 4; ++c) {
    CHECK(model.region[c] == Region::Tail);
    CHECK(spec.in_tail(model.centroid(c), 3));
  }
  for (int c = 4; c < 12; ++c) CHECK(model.region[c] == Region::Bulk);
}

TEST_CASE("zero tail clusters degrade to plain k-means") {
  Rng rng(35);
  auto series = gaussian_series(2, 400, rng);
  auto model = fit_state_space(series, TailRegionSpec::at_level(0.96), 0, 5, 2, 50, 7);
  CHECK(model.n_clusters() == 5);
  auto plain = kmeans(series_to_points(series), series.n, 2, 5, 2, 50, Rng::derive(7, 1));
  // same seed path as the bulk region, so the centroids must agree
  CHECK(model.centroids == plain.centroids);
}

TEST_CASE("a region with too few points is rejected") {
  Rng rng(36);
  TimeSeriesMatrix series(2, 50, Space::Gaussian, TimeStampVector::uniform(0.0, 1.0, 50));
  for (double& v : series.data) v = -std::abs(rng.normal());  // nothing in the tail
  CHECK_THROWS_AS(fit_state_space(series, TailRegionSpec::at_level(0.96), 2, 5, 2, 50, 1),
                  RegionEmpty);
}

TEST_CASE("assignment labels centroids by proximity with index tie-break") {
  ClusterModel model;
  model.m = 1;
  model.n_tail = 0;
  model.n_bulk = 3;
  model.centroids = {0.0, 4.0, 10.0};
  model.region = {Region::Bulk, Region::Bulk, Region::Bulk};

  TimeSeriesMatrix series(1, 4, Space::Gaussian, TimeStampVector::uniform(0.0, 1.0, 4));
  series.at(0, 0) = 0.2;   // nearest 0
  series.at(0, 1) = 4.0;   // exactly centroid 1
  series.at(0, 2) = 2.0;   // equidistant between 0 and 4 -> lower index
  series.at(0, 3) = 11.0;  // nearest 10
  auto seq = assign_states(series, model);
  CHECK(seq.states == std::vector<int>{0, 1, 0, 2});
}

TEST_CASE("centroid rows map back to their own labels in order") {
  Rng rng(37);
  auto series = gaussian_series(3, 900, rng);
  auto model = fit_state_space(series, TailRegionSpec::at_level(0.9), 2, 6, 2, 60, 3);
  TimeSeriesMatrix rows(3, model.n_clusters(), Space::Gaussian,
                        TimeStampVector::uniform(0.0, 1.0, model.n_clusters()));
  for (int c = 0; c < model.n_clusters(); ++c)
    for (int i = 0; i < 3; ++i) rows.at(i, c) = model.centroid(c)[i];
  auto seq = assign_states(rows, model);
  for (int c = 0; c < model.n_clusters(); ++c) CHECK(seq.states[c] == c);
}

TEST_CASE("cluster models round-trip through JSON") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "gf_test_cluster";
  fs::create_directories(dir);
  Rng rng(38);
  auto series = gaussian_series(2, 600, rng);
  auto model = fit_state_space(series, TailRegionSpec::at_level(0.96), 2, 4, 2, 50, 11);
  model.save(dir / "clusters.json");
  auto loaded = ClusterModel::load(dir / "clusters.json");
  CHECK(loaded.centroids == model.centroids);
  CHECK(loaded.n_tail == model.n_tail);
  CHECK(loaded.spec.threshold == model.spec.threshold);
  fs::remove_all(dir);
}

}  // TEST_SUITE
