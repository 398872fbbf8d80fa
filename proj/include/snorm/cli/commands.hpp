#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "snorm/cli/config.hpp"
#include "snorm/metrics/spectrum.hpp"
#include "snorm/net/gradcheck.hpp"
#include "snorm/training/gan.hpp"

namespace snorm::cli {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,  // gradcheck found a mismatch
  kExitConfig = 2,
  kExitCollapse = 3,  // training produced a non-finite value
  kExitIo = 4,
};

struct RunManifest {
  std::string run_id;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string library_version;
  std::string started_at;   // ISO 8601, UTC
  std::string finished_at;  // ISO 8601, UTC
  std::string status;       // "completed" or "collapsed"
  std::string collapse_reason;
  training::MetricRecord final_metrics;
  double inception_score = 0.0;
  /// Paths relative to the run directory, including the manifest itself.
  std::vector<std::string> files;
};

io::Json to_json(const RunManifest& manifest);

struct RunResult {
  int exit_code = kExitOk;
  RunManifest manifest;
  training::TrainReport report;
};

/// Trains one GAN into `config.out_dir`: config.json, metrics.csv,
/// metrics.jsonl, checkpoints/*.ckpt.json and manifest.json. Earlier metric
/// files and checkpoints in that directory are replaced.
RunResult run_experiment(const ExperimentConfig& config);

struct SweepRow {
  std::string method;
  std::string setting;
  std::uint64_t seed = 0;
  std::string run_id;
  bool collapsed = false;
  double frechet = 0.0;
  int mode_coverage = 0;
  double inception_score = 0.0;
};

struct SweepCell {
  std::string method;
  std::string setting;
  std::size_t seeds = 0;
  std::size_t collapsed = 0;
  double frechet_mean = 0.0;  // over non-collapsed seeds; NaN if none
  double mode_coverage_mean = 0.0;
  int mode_coverage_min = 0;
  int mode_coverage_max = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;    // method-major, then setting, then seed
  std::vector<SweepCell> cells;  // one per method x setting
  std::vector<std::string> files;
};

/// Config applied to one sweep run: every discriminator layer takes the
/// method's normalizer, and the loss, setting, seed and run directory change.
ExperimentConfig sweep_run_config(const ExperimentConfig& base, const SweepMethod& method,
                                  const std::string& setting, std::uint64_t seed);
std::string sweep_run_id(const SweepMethod& method, const std::string& setting, std::uint64_t seed);

/// Runs every cell with up to `config.jobs` worker threads. Writes
/// runs/<run_id>/..., sweep_runs.csv, sweep.csv and sweep_manifest.json.
SweepResult run_sweep(const ExperimentConfig& config);

std::string sweep_rows_csv(const std::vector<SweepRow>& rows);
std::string sweep_cells_csv(const std::vector<SweepCell>& cells);

struct AnalyzeOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path out_dir = "analysis";
  /// Empty: "discriminator" if present, otherwise the only stored network.
  std::string network;
  /// Power steps from the stored state when forming spectral effective weights.
  int power_steps = 100;
  std::size_t pairs = 10000;
  std::uint64_t seed = 0;
};

struct AnalyzeReport {
  std::string network;
  metrics::SpectrumReport spectrum;
  /// Absent when an activation is not 1-Lipschitz.
  std::optional<double> lipschitz_upper_bound;
  double empirical_lipschitz = 0.0;
  std::vector<std::string> files;
};

/// Writes spectrum.json, spectrum.csv and analysis.json into `out_dir`.
/// Throws CheckpointError for unreadable or corrupt checkpoints.
AnalyzeReport analyze_checkpoint(const AnalyzeOptions& options);

struct GradcheckCase {
  std::string normalizer;
  std::string loss;
  net::GradCheckReport report;
};

/// For each normalizer kind and loss kind: a 3-layer critic (tanh, leaky ReLU,
/// linear) on random real and fake batches, checked against central differences.
std::vector<GradcheckCase> run_gradcheck(const GradcheckPlan& plan, std::uint64_t seed);
io::Json to_json(const std::vector<GradcheckCase>& cases);

}  // namespace snorm::cli
