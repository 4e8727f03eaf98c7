#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "genformer/baseline.hpp"
#include "genformer/clustering.hpp"
#include "genformer/dataset.hpp"
#include "genformer/markov.hpp"
#include "genformer/metrics.hpp"
#include "genformer/pipeline.hpp"
#include "genformer/postprocess.hpp"
#include "genformer/sdebench.hpp"
#include "genformer/special.hpp"
#include "genformer/version.hpp"

namespace py = pybind11;
using namespace genformer;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

TimeSeriesMatrix series_from_array(const Array& arr, Space space) {
  if (arr.ndim() != 2) throw ShapeMismatch("expected a 2-D array (locations x stamps)");
  const int m = static_cast<int>(arr.shape(0));
  const int n = static_cast<int>(arr.shape(1));
  TimeSeriesMatrix s(m, n, space, TimeStampVector::uniform(0.0, 1.0, n));
  auto r = arr.unchecked<2>();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) s.at(i, j) = r(i, j);
  return s;
}

Array series_to_array(const TimeSeriesMatrix& s) {
  Array arr({s.m, s.n});
  auto w = arr.mutable_unchecked<2>();
  for (int i = 0; i < s.m; ++i)
    for (int j = 0; j < s.n; ++j) w(i, j) = s.at(i, j);
  return arr;
}

CorrelationMatrix corr_from_array(const Array& arr) {
  if (arr.ndim() != 2 || arr.shape(0) != arr.shape(1))
    throw ShapeMismatch("expected a square matrix");
  CorrelationMatrix c(static_cast<int>(arr.shape(0)));
  auto r = arr.unchecked<2>();
  for (int i = 0; i < c.m; ++i)
    for (int j = 0; j < c.m; ++j) c.at(i, j) = r(i, j);
  return c;
}

Array corr_to_array(const CorrelationMatrix& c) {
  Array arr({c.m, c.m});
  auto w = arr.mutable_unchecked<2>();
  for (int i = 0; i < c.m; ++i)
    for (int j = 0; j < c.m; ++j) w(i, j) = c.at(i, j);
  return arr;
}

}  // namespace

PYBIND11_MODULE(_genformer, m) {
  m.doc() = "GenFormer stochastic-generator core";
  m.attr("__version__") = kVersion;

  // special functions
  m.def("gaussian_cdf", py::vectorize(gaussian_cdf), py::arg("x"));
  m.def("gaussian_quantile", py::vectorize(gaussian_quantile), py::arg("p"));
  m.def("gamma_cdf", py::vectorize(gamma_cdf), py::arg("x"), py::arg("shape"), py::arg("rate"));
  m.def("gamma_quantile", py::vectorize(gamma_quantile), py::arg("p"), py::arg("shape"),
        py::arg("rate"));

  // SDE benchmark
  m.def(
      "sde_simulate",
      [](double theta, double alpha, double beta, double dt, int m_, int n_steps,
         int n_realizations, std::uint64_t seed) {
        SdeParams p;
        p.theta = theta;
        p.alpha = alpha;
        p.beta = beta;
        p.dt = dt;
        p.m = m_;
        p.n_steps = n_steps;
        p.n_realizations = n_realizations;
        p.seed = seed;
        auto run = milstein_simulate(p);
        py::array_t<double> out({n_realizations, m_ + 1, n_steps});
        auto w = out.mutable_unchecked<3>();
        for (int r = 0; r < n_realizations; ++r)
          for (int i = 0; i <= m_; ++i)
            for (int j = 0; j < n_steps; ++j) w(r, i, j) = run.q[r].at(i, j);
        return out;
      },
      py::arg("theta") = 40.0, py::arg("alpha") = 1.0, py::arg("beta") = 1.0,
      py::arg("dt") = 1e-3, py::arg("m") = 3, py::arg("n_steps") = 200,
      py::arg("n_realizations") = 100, py::arg("seed") = 0,
      "Milstein paths of the CIR-type system; returns (R, m+1, n) Q-paths");
  m.def(
      "build_v",
      [](const Array& q) {
        return series_to_array(build_v(series_from_array(q, Space::Physical)));
      },
      py::arg("q"), "V_i = Q_0 + Q_i from one (m+1, n) Q-path");

  // clustering and Markov states
  m.def(
      "kmeans",
      [](const Array& points, int k, int n_restarts, int max_iters, std::uint64_t seed) {
        if (points.ndim() != 2) throw ShapeMismatch("points must be (n, m)");
        const int n = static_cast<int>(points.shape(0));
        const int dim = static_cast<int>(points.shape(1));
        std::vector<double> flat(points.data(), points.data() + n * dim);
        auto result = kmeans(flat, n, dim, k, n_restarts, max_iters, seed);
        Array centroids({k, dim});
        std::copy(result.centroids.begin(), result.centroids.end(),
                  centroids.mutable_data());
        py::array_t<int> assignment(n);
        std::copy(result.assignment.begin(), result.assignment.end(),
                  assignment.mutable_data());
        return py::make_tuple(centroids, assignment, result.inertia);
      },
      py::arg("points"), py::arg("k"), py::arg("n_restarts") = 20, py::arg("max_iters") = 100,
      py::arg("seed") = 0, "Lloyd k-means with k-means++ restarts");
  m.def(
      "fit_state_space",
      [](const Array& gaussian_series, double level, int n_tail, int n_bulk, int n_restarts,
         int max_iters, std::uint64_t seed) {
        auto series = series_from_array(gaussian_series, Space::Gaussian);
        auto model = fit_state_space(series, TailRegionSpec::at_level(level), n_tail, n_bulk,
                                     n_restarts, max_iters, seed);
        Array centroids({model.n_clusters(), model.m});
        std::copy(model.centroids.begin(), model.centroids.end(), centroids.mutable_data());
        return py::make_tuple(centroids, model.n_tail, model.spec.threshold);
      },
      py::arg("gaussian_series"), py::arg("level") = 0.96, py::arg("n_tail") = 100,
      py::arg("n_bulk") = 200, py::arg("n_restarts") = 20, py::arg("max_iters") = 100,
      py::arg("seed") = 0,
      "Tail-aware clustering; returns (centroids, n_tail, tail threshold)");
  m.def(
      "assign_states",
      [](const Array& gaussian_series, const Array& centroids, int n_tail) {
        auto series = series_from_array(gaussian_series, Space::Gaussian);
        ClusterModel model;
        model.m = static_cast<int>(centroids.shape(1));
        model.n_tail = n_tail;
        model.n_bulk = static_cast<int>(centroids.shape(0)) - n_tail;
        model.centroids.assign(centroids.data(),
                               centroids.data() + centroids.shape(0) * centroids.shape(1));
        model.region.assign(model.n_tail, Region::Tail);
        model.region.insert(model.region.end(), model.n_bulk, Region::Bulk);
        auto seq = assign_states(series, model);
        py::array_t<int> out(seq.states.size());
        std::copy(seq.states.begin(), seq.states.end(), out.mutable_data());
        return out;
      },
      py::arg("gaussian_series"), py::arg("centroids"), py::arg("n_tail") = 0,
      "Nearest-centroid state labels");
  m.def(
      "estimate_transition_matrix",
      [](const std::vector<std::vector<int>>& seqs, int n_states) {
        std::vector<MarkovStateSequence> wrapped;
        for (const auto& s : seqs) {
          MarkovStateSequence seq;
          seq.states = s;
          seq.n_states = n_states;
          seq.validate();
          wrapped.push_back(std::move(seq));
        }
        auto tm = estimate_transition_matrix(wrapped);
        Array probs({n_states, n_states});
        std::copy(tm.probs.begin(), tm.probs.end(), probs.mutable_data());
        return probs;
      },
      py::arg("sequences"), py::arg("n_states"));
  m.def(
      "simulate_chain",
      [](const Array& probs, int init_state, int n_steps, std::uint64_t seed) {
        TransitionMatrix tm;
        tm.n_states = static_cast<int>(probs.shape(0));
        tm.probs.assign(probs.data(), probs.data() + probs.size());
        tm.counts.assign(tm.probs.size(), 0);
        tm.stationary.assign(tm.n_states, 1.0 / tm.n_states);
        auto seq = simulate_chain(tm, init_state, n_steps, seed);
        py::array_t<int> out(seq.states.size());
        std::copy(seq.states.begin(), seq.states.end(), out.mutable_data());
        return out;
      },
      py::arg("probs"), py::arg("init_state"), py::arg("n_steps"), py::arg("seed") = 0);

  // post-processing
  m.def(
      "spatial_correlation",
      [](const Array& series) {
        return corr_to_array(spatial_correlation(series_from_array(series, Space::Gaussian)));
      },
      py::arg("series"), "Uncentered second-moment matrix X X^T / n");
  m.def(
      "cholesky_lower",
      [](const Array& matrix) {
        auto f = cholesky(corr_from_array(matrix));
        Array out({f.m, f.m});
        std::copy(f.lower.begin(), f.lower.end(), out.mutable_data());
        return out;
      },
      py::arg("matrix"));
  m.def(
      "correlation_correct",
      [](const Array& series, const Array& target, bool transpose_variant) {
        return series_to_array(correlation_correct(series_from_array(series, Space::Gaussian),
                                                   corr_from_array(target), transpose_variant));
      },
      py::arg("series"), py::arg("target"), py::arg("transpose_variant") = false);
  m.def(
      "reshuffle_gaussian",
      [](const Array& series, std::uint64_t seed) {
        return series_to_array(reshuffle(series_from_array(series, Space::Gaussian),
                                         MarginalModel::standard_gaussian(), seed));
      },
      py::arg("series"), py::arg("seed") = 0,
      "Rank reshuffle against fresh standard-Gaussian samples");
  m.def(
      "reshuffle_with_samples",
      [](const Array& series, const std::vector<std::vector<double>>& fresh) {
        return series_to_array(
            reshuffle_with_samples(series_from_array(series, Space::Gaussian), fresh));
      },
      py::arg("series"), py::arg("fresh"));

  // metrics
  m.def(
      "frobenius_rel_error",
      [](const Array& target, const Array& estimate) {
        return frobenius_rel_error(corr_from_array(target), corr_from_array(estimate));
      },
      py::arg("target"), py::arg("estimate"));
  m.def(
      "autocorr_curve",
      [](const Array& series, int tau_max) {
        return autocorr_curve({series_from_array(series, Space::Gaussian)}, tau_max);
      },
      py::arg("series"), py::arg("tau_max"));
  m.def(
      "exceedance_curve",
      [](const std::vector<double>& samples, const std::vector<double>& grid) {
        return exceedance_curve(samples, grid);
      },
      py::arg("samples"), py::arg("grid"));
  m.def("return_period_l1_error", &return_period_l1_error, py::arg("p_target"),
        py::arg("p_model"));

  // pipeline entry points
  m.def(
      "default_config",
      [](const std::string& experiment, const std::string& profile) {
        return PipelineConfig::profile(experiment, profile).to_json().dump(2);
      },
      py::arg("experiment") = "sde", py::arg("profile") = "desk",
      "Built-in profile as a JSON string");
  m.def(
      "run_pipeline",
      [](const std::string& config_json, const std::string& out_dir) {
        auto cfg = PipelineConfig::from_json(nlohmann::json::parse(config_json));
        return run_pipeline(cfg, out_dir).dump(2);
      },
      py::arg("config_json"), py::arg("out_dir"),
      "Run every pipeline stage; returns the report as a JSON string");
}
