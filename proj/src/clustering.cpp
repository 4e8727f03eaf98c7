#include "genformer/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "genformer/io.hpp"
#include "genformer/rng.hpp"
#include "genformer/special.hpp"

namespace genformer {

TailRegionSpec TailRegionSpec::at_level(double level) {
  if (!(level > 0.0 && level < 1.0))
    throw DomainError("TailRegionSpec: level must lie in (0, 1)");
  TailRegionSpec s;
  s.quantile_level = level;
  s.threshold = gaussian_quantile(level);
  return s;
}

bool TailRegionSpec::in_tail(const double* point, int m) const {
  for (int i = 0; i < m; ++i)
    if (point[i] > threshold) return true;
  return false;
}

namespace {

double sq_dist(const double* a, const double* b, int m) {
  double d = 0.0;
  for (int i = 0; i < m; ++i) {
    double diff = a[i] - b[i];
    d += diff * diff;
  }
  return d;
}

int count_distinct(const std::vector<double>& points, int n, int m) {
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  auto less = [&](int a, int b) {
    return std::lexicographical_compare(points.begin() + static_cast<std::size_t>(a) * m,
                                        points.begin() + static_cast<std::size_t>(a + 1) * m,
                                        points.begin() + static_cast<std::size_t>(b) * m,
                                        points.begin() + static_cast<std::size_t>(b + 1) * m);
  };
  std::sort(order.begin(), order.end(), less);
  int distinct = n > 0 ? 1 : 0;
  for (int i = 1; i < n; ++i)
    if (less(order[i - 1], order[i])) ++distinct;
  return distinct;
}

struct LloydRun {
  std::vector<double> centroids;
  std::vector<int> assignment;
  double inertia = 0.0;
  int iterations = 0;
  std::vector<double> inertia_trace;
};

void seed_plus_plus(const std::vector<double>& points, int n, int m, int k, Rng& rng,
                    std::vector<double>& centroids) {
  centroids.assign(static_cast<std::size_t>(k) * m, 0.0);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  int first = static_cast<int>(rng.index(static_cast<std::size_t>(n)));
  std::copy_n(points.begin() + static_cast<std::size_t>(first) * m, m, centroids.begin());
  for (int c = 1; c < k; ++c) {
    const double* prev = centroids.data() + static_cast<std::size_t>(c - 1) * m;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], sq_dist(points.data() + static_cast<std::size_t>(i) * m, prev, m));
      total += d2[i];
    }
    int pick = 0;
    if (total > 0.0) {
      double u = rng.uniform01() * total;
      double acc = 0.0;
      pick = n - 1;
      for (int i = 0; i < n; ++i) {
        acc += d2[i];
        if (u <= acc) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<int>(rng.index(static_cast<std::size_t>(n)));
    }
    std::copy_n(points.begin() + static_cast<std::size_t>(pick) * m, m,
                centroids.begin() + static_cast<std::size_t>(c) * m);
  }
}

LloydRun lloyd(const std::vector<double>& points, int n, int m, int k, int max_iters, Rng& rng) {
  LloydRun run;
  seed_plus_plus(points, n, m, k, rng, run.centroids);
  run.assignment.assign(n, -1);
  std::vector<double> sums(static_cast<std::size_t>(k) * m);
  std::vector<int> counts(k);
  std::vector<double> point_d2(n);

  double prev_inertia = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iters; ++it) {
    bool changed = false;
    double inertia = 0.0;
    for (int i = 0; i < n; ++i) {
      const double* p = points.data() + static_cast<std::size_t>(i) * m;
      double best = std::numeric_limits<double>::infinity();
      int best_c = 0;
      for (int c = 0; c < k; ++c) {
        double d = sq_dist(p, run.centroids.data() + static_cast<std::size_t>(c) * m, m);
        if (d < best) {
          best = d;
          best_c = c;
        }
      }
      if (run.assignment[i] != best_c) {
        run.assignment[i] = best_c;
        changed = true;
      }
      point_d2[i] = best;
      inertia += best;
    }
    // Lloyd monotonicity: assignment + recentering can only lower the objective.
    if (inertia > prev_inertia * (1.0 + 1e-12) + 1e-9)
      throw Error("kmeans: inertia increased across an iteration");
    prev_inertia = inertia;
    run.inertia = inertia;
    run.inertia_trace.push_back(inertia);
    run.iterations = it + 1;
    if (!changed && it > 0) break;

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < n; ++i) {
      const double* p = points.data() + static_cast<std::size_t>(i) * m;
      double* s = sums.data() + static_cast<std::size_t>(run.assignment[i]) * m;
      for (int d = 0; d < m; ++d) s[d] += p[d];
      counts[run.assignment[i]] += 1;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        double* ctr = run.centroids.data() + static_cast<std::size_t>(c) * m;
        const double* s = sums.data() + static_cast<std::size_t>(c) * m;
        for (int d = 0; d < m; ++d) ctr[d] = s[d] / counts[c];
      } else {
        // Reseed an empty cluster to the farthest point from its centroid.
        int far = 0;
        for (int i = 1; i < n; ++i)
          if (point_d2[i] > point_d2[far]) far = i;
        std::copy_n(points.begin() + static_cast<std::size_t>(far) * m, m,
                    run.centroids.begin() + static_cast<std::size_t>(c) * m);
        point_d2[far] = 0.0;
        changed = true;
        prev_inertia = std::numeric_limits<double>::infinity();
      }
    }
    if (!changed) break;
  }
  return run;
}

}  // namespace

KMeansResult kmeans(const std::vector<double>& points, int n, int m, int k, int n_restarts,
                    int max_iters, std::uint64_t seed) {
  if (n <= 0) throw EmptyInput("kmeans: no points");
  if (static_cast<std::size_t>(n) * m != points.size())
    throw ShapeMismatch("kmeans: points size != n*m");
  if (k <= 0) throw DomainError("kmeans: k must be positive");
  if (n_restarts <= 0 || max_iters <= 0)
    throw DomainError("kmeans: restarts and max_iters must be positive");
  if (k > n || k > count_distinct(points, n, m))
    throw KTooLarge("kmeans: k exceeds the number of distinct points");

  LloydRun best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < n_restarts; ++r) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(r)));
    LloydRun run = lloyd(points, n, m, k, max_iters, rng);
    if (run.inertia < best.inertia) best = std::move(run);
  }

  KMeansResult result;
  result.k = k;
  result.m = m;
  result.centroids = std::move(best.centroids);
  result.assignment = std::move(best.assignment);
  result.inertia = best.inertia;
  result.iterations = best.iterations;
  result.inertia_trace = std::move(best.inertia_trace);
  return result;
}

ClusterModel fit_state_space(const TimeSeriesMatrix& series, const TailRegionSpec& spec,
                             int n_tail, int n_bulk, int n_restarts, int max_iters,
                             std::uint64_t seed) {
  if (series.space != Space::Gaussian)
    throw SpaceTagMismatch("fit_state_space: series must be in Gaussian space");
  if (n_tail < 0 || n_bulk <= 0) throw DomainError("fit_state_space: invalid cluster counts");

  const int m = series.m;
  const int n = series.n;
  std::vector<double> point(m);
  std::vector<double> tail_pts, bulk_pts;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) point[i] = series.at(i, j);
    auto& dst = (n_tail > 0 && spec.in_tail(point.data(), m)) ? tail_pts : bulk_pts;
    dst.insert(dst.end(), point.begin(), point.end());
  }
  const int n_tail_pts = static_cast<int>(tail_pts.size()) / m;
  const int n_bulk_pts = static_cast<int>(bulk_pts.size()) / m;
  if (n_tail > 0 && n_tail_pts < n_tail)
    throw RegionEmpty("fit_state_space: tail region has fewer points than clusters");
  if (n_bulk_pts < n_bulk)
    throw RegionEmpty("fit_state_space: bulk region has fewer points than clusters");

  ClusterModel model;
  model.m = m;
  model.n_tail = n_tail;
  model.n_bulk = n_bulk;
  model.spec = spec;
  if (n_tail > 0) {
    KMeansResult tail =
        kmeans(tail_pts, n_tail_pts, m, n_tail, n_restarts, max_iters, Rng::derive(seed, 0));
    model.centroids.insert(model.centroids.end(), tail.centroids.begin(), tail.centroids.end());
    model.region.insert(model.region.end(), n_tail, Region::Tail);
  }
  KMeansResult bulk =
      kmeans(bulk_pts, n_bulk_pts, m, n_bulk, n_restarts, max_iters, Rng::derive(seed, 1));
  model.centroids.insert(model.centroids.end(), bulk.centroids.begin(), bulk.centroids.end());
  model.region.insert(model.region.end(), n_bulk, Region::Bulk);
  return model;
}

std::vector<double> series_to_points(const TimeSeriesMatrix& series) {
  std::vector<double> pts(static_cast<std::size_t>(series.n) * series.m);
  for (int j = 0; j < series.n; ++j)
    for (int i = 0; i < series.m; ++i)
      pts[static_cast<std::size_t>(j) * series.m + i] = series.at(i, j);
  return pts;
}

MarkovStateSequence assign_states(const TimeSeriesMatrix& series, const ClusterModel& model) {
  if (series.m != model.m) throw ShapeMismatch("assign_states: dimension mismatch");
  MarkovStateSequence seq;
  seq.n_states = model.n_clusters();
  seq.states.resize(series.n);
  std::vector<double> point(series.m);
  for (int j = 0; j < series.n; ++j) {
    for (int i = 0; i < series.m; ++i) point[i] = series.at(i, j);
    double best = std::numeric_limits<double>::infinity();
    int best_c = 0;
    for (int c = 0; c < model.n_clusters(); ++c) {
      double d = sq_dist(point.data(), model.centroid(c), series.m);
      if (d < best) {
        best = d;
        best_c = c;
      }
    }
    seq.states[j] = best_c;
  }
  return seq;
}

void ClusterModel::save(const std::filesystem::path& path) const {
  nlohmann::json j;
  j["m"] = m;
  j["n_tail"] = n_tail;
  j["n_bulk"] = n_bulk;
  j["quantile_level"] = spec.quantile_level;
  j["threshold"] = spec.threshold;
  j["centroids"] = nlohmann::json::array();
  for (int c = 0; c < n_clusters(); ++c) {
    nlohmann::json row = nlohmann::json::array();
    for (int d = 0; d < m; ++d) row.push_back(centroid(c)[d]);
    j["centroids"].push_back(row);
  }
  nlohmann::json regions = nlohmann::json::array();
  for (Region r : region) regions.push_back(r == Region::Tail ? "tail" : "bulk");
  j["regions"] = regions;
  io::write_json_atomic(path, j);
}

ClusterModel ClusterModel::load(const std::filesystem::path& path) {
  nlohmann::json j = io::read_json(path);
  ClusterModel model;
  model.m = j.at("m");
  model.n_tail = j.at("n_tail");
  model.n_bulk = j.at("n_bulk");
  model.spec.quantile_level = j.at("quantile_level");
  model.spec.threshold = j.at("threshold");
  for (const auto& row : j.at("centroids"))
    for (const auto& v : row) model.centroids.push_back(v);
  for (const auto& r : j.at("regions"))
    model.region.push_back(r == "tail" ? Region::Tail : Region::Bulk);
  if (static_cast<int>(model.region.size()) != model.n_clusters() ||
      static_cast<int>(model.centroids.size()) != model.n_clusters() * model.m)
    throw IoError("cluster model file is inconsistent: " + path.string());
  return model;
}

}  // namespace genformer
