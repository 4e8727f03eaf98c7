#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "genformer/types.hpp"

namespace genformer {

// CIR-type system: dQ_i = theta (alpha/beta - Q_i) dt + sqrt(2 theta Q_i / beta) dB_i,
// i = 0..m, with V_i = Q_0 + Q_i for i = 1..m.
struct SdeParams {
  double theta = 40.0;
  double alpha = 1.0;
  double beta = 1.0;
  double dt = 1e-3;
  int m = 3;
  int n_steps = 200;
  int n_realizations = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SdeRun {
  // One (m+1) x n_steps matrix of Q paths per realization, Physical space.
  std::vector<TimeSeriesMatrix> q;
  double clamp_fraction = 0.0;  // share of steps clipped at the positivity floor
};

// One Milstein update given the Brownian increment db, before the positivity
// clamp. The 1/2 b b' correction simplifies to theta/(2 beta).
double milstein_step(double x, double db, const SdeParams& params);

// Milstein integration initialized from the stationary Gamma(alpha, beta) law.
SdeRun milstein_simulate(const SdeParams& params);

// V_i = Q_0 + Q_i, rows 1..m of the output.
TimeSeriesMatrix build_v(const TimeSeriesMatrix& q_matrix);

// Closed-form second-moment oracles of the stationary solution.
double oracle_autocorr(double tau, const SdeParams& params);
double oracle_cross_corr(int k, int i, double tau, const SdeParams& params);

struct SdeOracles {
  double mean_q = 0.0;        // alpha / beta
  double var_q = 0.0;         // alpha / beta^2
  double v_mean = 0.0;        // 2 alpha / beta
  double v_var = 0.0;         // 2 alpha / beta^2
  double v_gamma_shape = 0.0; // 2 alpha
  double v_gamma_rate = 0.0;  // beta
};

SdeOracles sde_oracles(const SdeParams& params);
nlohmann::json sde_oracles_json(const SdeParams& params);

}  // namespace genformer
