#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "genformer/types.hpp"

namespace genformer {

// Tail region in Gaussian space: any component above the given standard-normal
// quantile.
struct TailRegionSpec {
  double quantile_level = 0.96;
  double threshold = 0.0;

  static TailRegionSpec at_level(double level);
  bool in_tail(const double* point, int m) const;
};

enum class Region { Tail, Bulk };

struct KMeansResult {
  int k = 0;
  int m = 0;
  std::vector<double> centroids;  // k x m row-major
  std::vector<int> assignment;
  double inertia = 0.0;
  int iterations = 0;
  std::vector<double> inertia_trace;  // one entry per Lloyd iteration
};

// Lloyd iterations with k-means++ seeding, repeated n_restarts times; returns
// the restart with lowest within-cluster squared distance. Deterministic for a
// given seed. points is n x m row-major.
KMeansResult kmeans(const std::vector<double>& points, int n, int m, int k, int n_restarts,
                    int max_iters, std::uint64_t seed);

// Markov state space: tail and bulk centroids, tail indexed first.
struct ClusterModel {
  int m = 0;
  int n_tail = 0;
  int n_bulk = 0;
  std::vector<double> centroids;  // (n_tail + n_bulk) x m row-major
  std::vector<Region> region;
  TailRegionSpec spec;

  int n_clusters() const { return n_tail + n_bulk; }
  const double* centroid(int c) const { return centroids.data() + static_cast<std::size_t>(c) * m; }

  void save(const std::filesystem::path& path) const;
  static ClusterModel load(const std::filesystem::path& path);
};

// Partitions time stamps by the tail predicate and clusters each region
// separately. n_tail = 0 skips the split and clusters everything as bulk.
ClusterModel fit_state_space(const TimeSeriesMatrix& series, const TailRegionSpec& spec,
                             int n_tail, int n_bulk, int n_restarts, int max_iters,
                             std::uint64_t seed);

// Nearest-centroid labels over all centroids; ties break to the lowest index.
MarkovStateSequence assign_states(const TimeSeriesMatrix& series, const ClusterModel& model);

// Per-timestamp points, n x m row-major.
std::vector<double> series_to_points(const TimeSeriesMatrix& series);

}  // namespace genformer
