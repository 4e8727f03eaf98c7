#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "genformer/sdebench.hpp"
#include "genformer/types.hpp"

namespace genformer {

// Flat-keyed configuration for the whole pipeline. Defaults come from a named
// profile; a user config JSON overrides individual keys.
struct PipelineConfig {
  std::string experiment = "sde";  // "sde" | "wind"
  std::uint64_t seed = 2024;
  HyperParams hp;

  SdeParams sde;
  std::string marginal_kind = "gamma";  // "gamma" (analytic) | "empirical"

  std::string wind_csv;
  int ma_window = 720;

  int n_tail_clusters = 20;
  int n_bulk_clusters = 60;
  double tail_quantile_level = 0.96;
  int kmeans_restarts = 20;
  int kmeans_max_iters = 100;

  std::string split_mode = "by_realization";  // "by_realization" | "by_time"

  int n_sim = 200;
  int copies_per_init = 5;
  std::string init_mode = "first_window";  // "first_window" | "monthly" | "random"
  int n_inits = 0;                         // used by init_mode = "random"

  bool baseline_enabled = true;
  int baseline_tau_max = 60;

  double exceedance_min = 0.0;
  double exceedance_max = 25.0;
  double exceedance_step = 0.25;
  int autocorr_tau_max = 25;
  double density_min = 0.0;
  double density_max = 15.0;
  double density_step = 0.05;
  bool cholesky_transpose_variant = false;

  // Built-in profiles: "desk" (acceptance scale), "paper" (published scale),
  // "dryrun" (about a minute end to end).
  static PipelineConfig profile(const std::string& experiment, const std::string& name);
  static PipelineConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  std::string config_hash() const;
  void validate() const;
};

// Pipeline stages; each reads its upstream artifacts from `out` and writes its
// own, with a manifest under out/manifests/.
void stage_sde_gen(const PipelineConfig& cfg, const std::filesystem::path& out);
void stage_preprocess(const PipelineConfig& cfg, const std::filesystem::path& out);
void stage_fit_states(const PipelineConfig& cfg, const std::filesystem::path& out);
void stage_train_stategen(const PipelineConfig& cfg, const std::filesystem::path& out);
void stage_train_genformer(const PipelineConfig& cfg, const std::filesystem::path& out);
void stage_simulate(const PipelineConfig& cfg, const std::filesystem::path& out);
void stage_baseline(const PipelineConfig& cfg, const std::filesystem::path& out);
void stage_evaluate(const PipelineConfig& cfg, const std::filesystem::path& out);

// All stages in order (observations through report.json).
nlohmann::json run_pipeline(const PipelineConfig& cfg, const std::filesystem::path& out);

// Human-readable summary of an existing report.json.
std::string format_report(const nlohmann::json& report);

}  // namespace genformer
