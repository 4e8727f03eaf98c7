#include <doctest.h>

#include <chrono>
#include <filesystem>

#include "genformer/io.hpp"
#include "genformer/pipeline.hpp"
#include "genformer/rng.hpp"
#include "genformer/windprep.hpp"

using namespace genformer;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Synthetic two-station hourly wind record: diurnal cycle, slow drift, AR(1)
// noise, a few missing rows.
void write_synthetic_wind_csv(const fs::path& path, int n_days) {
  Rng rng(424242);
  std::string body = "station_id,year,month,day,hour,wind_speed\n";
  const std::int64_t t0 = hours_since_epoch({2016, 1, 1, 0});
  double ar[2] = {0.0, 0.0};
  for (int h = 0; h < 24 * n_days; ++h) {
    auto stamp = calendar_from_hours(t0 + h);
    for (int station = 0; station < 2; ++station) {
      ar[station] = 0.8 * ar[station] + rng.normal();
      if (station == 1 && h % 97 == 5) continue;  // occasional gaps
      double speed = 6.0 + 2.0 * station + 1.5 * std::sin(2.0 * M_PI * stamp.hour / 24.0) +
                     0.8 * std::sin(2.0 * M_PI * h / (24.0 * n_days)) + ar[station];
      body += (station == 0 ? "722020," : "722024,");
      body += std::to_string(stamp.year) + "," + std::to_string(stamp.month) + "," +
              std::to_string(stamp.day) + "," + std::to_string(stamp.hour) + "," +
              io::format_double(std::max(0.0, speed)) + "\n";
    }
  }
  io::write_text_atomic(path, body);
}

std::string slurp(const fs::path& p) { return io::read_text(p); }

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("the sde dry run completes quickly and produces every artifact") {
  auto out = fresh_dir("gf_pipe_dryrun");
  auto cfg = PipelineConfig::profile("sde", "dryrun");
  auto start = std::chrono::steady_clock::now();
  auto report = run_pipeline(cfg, out);
  auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(elapsed < 60.0);

  for (const char* artifact :
       {"observations", "observations_gaussian", "states", "marginals.json", "clusters.json",
        "stategen", "genformer", "synthetic_deep", "synthetic", "baseline", "report.json",
        "figures/spatial_correlation.csv", "figures/autocorrelation.csv", "figures/density.csv",
        "figures/state_frequencies.csv", "figures/exceedance.csv",
        "figures/tracked_trajectory.csv", "figures/sample_trajectory.csv", "oracles.json",
        "manifests/simulate.json"})
    CHECK_MESSAGE(fs::exists(out / artifact), artifact);

  // the Cholesky correction step is exact on the concatenated sample
  CHECK(report["spatial_correlation"]["rel_error_cholesky"].get<double>() < 1e-8);
  // reports carry their provenance
  CHECK(report["config_hash"] == cfg.config_hash());
  CHECK(report["seed"] == cfg.seed);

  auto manifest = io::read_json(out / "manifests" / "simulate.json");
  CHECK(manifest["config_hash"] == cfg.config_hash());
  CHECK(manifest["stage"] == "simulate");

  fs::remove_all(out);
}

TEST_CASE("identical configs and seeds produce byte-identical reports") {
  auto out_a = fresh_dir("gf_pipe_det_a");
  auto out_b = fresh_dir("gf_pipe_det_b");
  auto cfg = PipelineConfig::profile("sde", "dryrun");
  run_pipeline(cfg, out_a);
  run_pipeline(cfg, out_b);

  CHECK(slurp(out_a / "report.json") == slurp(out_b / "report.json"));
  for (const auto& entry : fs::directory_iterator(out_a / "figures")) {
    auto name = entry.path().filename();
    CHECK_MESSAGE(slurp(entry.path()) == slurp(out_b / "figures" / name), name.string());
  }
  // a different seed changes the report
  auto out_c = fresh_dir("gf_pipe_det_c");
  auto cfg2 = cfg;
  cfg2.seed += 1;
  run_pipeline(cfg2, out_c);
  CHECK(slurp(out_a / "report.json") != slurp(out_c / "report.json"));

  fs::remove_all(out_a);
  fs::remove_all(out_b);
  fs::remove_all(out_c);
}

TEST_CASE("the wind path runs end to end on synthetic data") {
  auto out = fresh_dir("gf_pipe_wind");
  auto csv = out / "wind_input.csv";
  write_synthetic_wind_csv(csv, 75);

  auto cfg = PipelineConfig::profile("wind", "dryrun");
  cfg.wind_csv = csv.string();
  auto report = run_pipeline(cfg, out);

  CHECK(report["experiment"] == "wind");
  CHECK(report["spatial_correlation"]["rel_error_cholesky"].get<double>() < 1e-8);
  CHECK(report["counts"]["synthetic_realizations"].get<int>() > 0);
  CHECK(fs::exists(out / "preprocess_record.json"));

  // calendar stamps survive into the synthetic realizations
  auto synth = io::read_realization_dir(out / "synthetic", Space::Physical);
  CHECK(synth.front().stamps.kind() == StampKind::Calendar);
  CHECK(synth.front().n == cfg.n_sim);

  fs::remove_all(out);
}

TEST_CASE("every built-in profile validates") {
  for (const char* exp : {"sde", "wind"})
    for (const char* name : {"desk", "paper", "dryrun"})
      CHECK_NOTHROW(PipelineConfig::profile(exp, name).validate());
}

TEST_CASE("config json round-trips and hashes stably") {
  auto cfg = PipelineConfig::profile("sde", "desk");
  auto j = cfg.to_json();
  auto back = PipelineConfig::from_json(j);
  CHECK(back.to_json() == j);
  CHECK(back.config_hash() == cfg.config_hash());

  auto tweaked = j;
  tweaked["n_sim"] = 128;
  CHECK(PipelineConfig::from_json(tweaked).config_hash() != cfg.config_hash());
}

TEST_CASE("config validation rejects inconsistent settings") {
  auto cfg = PipelineConfig::profile("sde", "dryrun");
  cfg.hp.n_clusters = 5;  // != tail + bulk
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  auto cfg2 = PipelineConfig::profile("sde", "dryrun");
  cfg2.n_sim = 4;  // below max(markov_order, q_enc_in)
  CHECK_THROWS_AS(run_pipeline(cfg2, fs::temp_directory_path() / "gf_pipe_bad"), ConfigError);
  CHECK_THROWS_AS(PipelineConfig::profile("sde", "huge"), ConfigError);
}

}  // TEST_SUITE
