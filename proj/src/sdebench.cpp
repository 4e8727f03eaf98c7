#include "genformer/sdebench.hpp"

#include <cmath>

#include "genformer/rng.hpp"

namespace genformer {

void SdeParams::validate() const {
  if (!(theta > 0.0)) throw DomainError("SdeParams: theta must be positive");
  if (!(alpha >= 1.0)) throw DomainError("SdeParams: alpha must be >= 1");
  if (!(beta > 0.0)) throw DomainError("SdeParams: beta must be positive");
  if (!(dt > 0.0)) throw DomainError("SdeParams: dt must be positive");
  if (m <= 0 || n_steps <= 0 || n_realizations <= 0)
    throw DomainError("SdeParams: m, n_steps, n_realizations must be positive");
}

double milstein_step(double x, double db, const SdeParams& params) {
  const double mean = params.alpha / params.beta;
  const double diff_coef = 2.0 * params.theta / params.beta;   // b(x)^2 = diff_coef * x
  const double correction = params.theta / (2.0 * params.beta);  // (1/2) b b' closed form
  return x + params.theta * (mean - x) * params.dt + std::sqrt(diff_coef * std::max(x, 0.0)) * db +
         correction * (db * db - params.dt);
}

SdeRun milstein_simulate(const SdeParams& params) {
  params.validate();
  const double sqrt_dt = std::sqrt(params.dt);
  const double floor = 1e-12;

  SdeRun run;
  run.q.reserve(params.n_realizations);
  std::int64_t clamped = 0;
  const std::int64_t total_steps = static_cast<std::int64_t>(params.n_realizations) *
                                   (params.m + 1) * (params.n_steps - 1);
  TimeStampVector stamps = TimeStampVector::uniform(0.0, params.dt, params.n_steps);

  for (int r = 0; r < params.n_realizations; ++r) {
    TimeSeriesMatrix q(params.m + 1, params.n_steps, Space::Physical, stamps);
    for (int i = 0; i <= params.m; ++i) {
      // One independent Brownian stream per (realization, component).
      Rng rng(Rng::derive(params.seed,
                          static_cast<std::uint64_t>(r) * (params.m + 1) + i));
      double x = rng.gamma(params.alpha, params.beta);
      q.at(i, 0) = x;
      for (int j = 1; j < params.n_steps; ++j) {
        double db = sqrt_dt * rng.normal();
        x = milstein_step(x, db, params);
        if (x < floor) {
          x = floor;
          ++clamped;
        }
        q.at(i, j) = x;
      }
    }
    run.q.push_back(std::move(q));
  }
  run.clamp_fraction = total_steps > 0 ? static_cast<double>(clamped) / total_steps : 0.0;
  return run;
}

TimeSeriesMatrix build_v(const TimeSeriesMatrix& q_matrix) {
  if (q_matrix.m < 2) throw ShapeMismatch("build_v: need at least Q_0 and one Q_i");
  const int m = q_matrix.m - 1;
  TimeSeriesMatrix v(m, q_matrix.n, Space::Physical, q_matrix.stamps);
  const double* q0 = q_matrix.row(0);
  for (int i = 1; i <= m; ++i) {
    const double* qi = q_matrix.row(i);
    double* dst = v.row(i - 1);
    for (int j = 0; j < q_matrix.n; ++j) dst[j] = q0[j] + qi[j];
  }
  return v;
}

double oracle_autocorr(double tau, const SdeParams& params) {
  if (tau < 0.0) throw DomainError("oracle_autocorr: tau must be nonnegative");
  return std::exp(-params.theta * tau);
}

double oracle_cross_corr(int k, int i, double tau, const SdeParams& params) {
  if (tau < 0.0) throw DomainError("oracle_cross_corr: tau must be nonnegative");
  double factor = k == i ? 1.0 : 0.5;
  return factor * std::exp(-params.theta * tau);
}

SdeOracles sde_oracles(const SdeParams& params) {
  SdeOracles o;
  o.mean_q = params.alpha / params.beta;
  o.var_q = params.alpha / (params.beta * params.beta);
  o.v_mean = 2.0 * params.alpha / params.beta;
  o.v_var = 2.0 * params.alpha / (params.beta * params.beta);
  o.v_gamma_shape = 2.0 * params.alpha;
  o.v_gamma_rate = params.beta;
  return o;
}

nlohmann::json sde_oracles_json(const SdeParams& params) {
  SdeOracles o = sde_oracles(params);
  nlohmann::json j;
  j["mean_q"] = o.mean_q;
  j["var_q"] = o.var_q;
  j["v_mean"] = o.v_mean;
  j["v_var"] = o.v_var;
  j["v_gamma_shape"] = o.v_gamma_shape;
  j["v_gamma_rate"] = o.v_gamma_rate;
  j["autocorr"] = "exp(-theta * tau)";
  j["cross_corr"] = "(1 - 0.5 * [k != i]) * exp(-theta * tau)";
  j["theta"] = params.theta;
  return j;
}

}  // namespace genformer
