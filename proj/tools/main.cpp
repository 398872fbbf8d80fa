// Command-line front end: run, sweep, analyze, gradcheck.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "snorm/cli/commands.hpp"
#include "snorm/cli/config.hpp"
#include "snorm/error.hpp"

namespace cli = snorm::cli;
using snorm::io::Json;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> jobs;
  std::optional<long> cadence;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool config_required) {
  auto* opt = cmd->add_option("--config", f.config, "Experiment config (JSON)");
  if (config_required) opt->required();
  cmd->add_option("--seed", f.seed, "Override the config seed");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--jobs", f.jobs, "Parallel runs (sweep)")->check(CLI::PositiveNumber);
  cmd->add_option("--cadence", f.cadence, "Metric logging cadence in generator updates")->check(CLI::PositiveNumber);
}

cli::ExperimentConfig resolve(const CommonFlags& f) {
  cli::ExperimentConfig c = f.config.empty() ? cli::default_config() : cli::load_config(f.config);
  if (f.seed) c.gan.seed = *f.seed;
  if (!f.out.empty()) c.out_dir = f.out;
  if (f.jobs) c.jobs = *f.jobs;
  if (f.cadence) c.gan.cadence = *f.cadence;
  snorm::training::validate(c.gan);
  return c;
}

int report_error(const std::string& kind, const std::string& message, const std::string& field, int code) {
  Json j{{"error", kind}, {"message", message}};
  if (!field.empty()) j["field"] = field;
  std::cerr << j.dump() << "\n";
  return code;
}

int cmd_run(const CommonFlags& f) {
  const auto config = resolve(f);
  const auto result = cli::run_experiment(config);
  const auto& m = result.manifest;
  std::printf("%s: %s, %ld generator updates, frechet %.6g, mode coverage %d, inception %.4g\n", m.run_id.c_str(),
              m.status.c_str(), result.report.generator_updates, m.final_metrics.frechet,
              m.final_metrics.mode_coverage, m.inception_score);
  if (result.report.collapsed) std::printf("collapse: %s\n", m.collapse_reason.c_str());
  return result.exit_code;
}

int cmd_sweep(const CommonFlags& f) {
  const auto config = resolve(f);
  const auto result = cli::run_sweep(config);
  std::fputs(cli::sweep_cells_csv(result.cells).c_str(), stdout);
  return cli::kExitOk;
}

int cmd_analyze(const CommonFlags& f, cli::AnalyzeOptions options) {
  if (f.seed) options.seed = *f.seed;
  if (!f.out.empty()) options.out_dir = f.out;
  const auto report = cli::analyze_checkpoint(options);
  for (const auto& layer : report.spectrum.layers) {
    std::printf("layer %zu: top %.9g effective_rank %.6g\n", layer.layer, layer.top, layer.effective_rank);
  }
  if (report.lipschitz_upper_bound) {
    std::printf("lipschitz upper bound %.9g\n", *report.lipschitz_upper_bound);
  } else {
    std::printf("lipschitz upper bound unavailable (activation constant exceeds 1)\n");
  }
  std::printf("empirical lipschitz %.9g\n", report.empirical_lipschitz);
  return cli::kExitOk;
}

int cmd_gradcheck(const CommonFlags& f, bool inject_fault, bool zero_layer) {
  auto config = resolve(f);
  if (inject_fault) config.gradcheck.inject_fault = true;
  if (zero_layer) config.gradcheck.zero_layer = true;
  const auto cases = cli::run_gradcheck(config.gradcheck, config.gan.seed);
  bool ok = true;
  for (const auto& c : cases) {
    const char* status = c.report.skipped ? "SKIP" : (c.report.passed() ? "PASS" : "FAIL");
    ok = ok && c.report.passed();
    std::printf("%-4s %-22s %-9s max_rel_error %.3e%s%s\n", status, c.normalizer.c_str(), c.loss.c_str(),
                c.report.max_rel_error, c.report.skipped ? "  " : "", c.report.skip_reason.c_str());
  }
  if (!f.out.empty()) {
    std::filesystem::create_directories(f.out);
    std::ofstream out(std::filesystem::path(f.out) / "gradcheck.json");
    if (!out) throw snorm::IoError("cannot write gradcheck.json under " + f.out);
    out << cli::to_json(cases).dump(2) << "\n";
  }
  return ok ? cli::kExitOk : cli::kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral normalization and Lipschitz-control experiments"};
  app.set_version_flag("--version", std::string(SNORM_VERSION));
  app.require_subcommand(1);

  CommonFlags run_flags, sweep_flags, analyze_flags, grad_flags;
  auto* run = app.add_subcommand("run", "Train one GAN and write metrics, checkpoints and a manifest");
  add_common(run, run_flags, false);
  auto* sweep = app.add_subcommand("sweep", "Run normalizers x settings x seeds and tabulate final metrics");
  add_common(sweep, sweep_flags, false);

  cli::AnalyzeOptions analyze_options;
  auto* analyze = app.add_subcommand("analyze", "Singular-value spectrum and Lipschitz report of a checkpoint");
  add_common(analyze, analyze_flags, false);
  analyze->add_option("checkpoint", analyze_options.checkpoint, "Checkpoint file")->required();
  analyze->add_option("--network", analyze_options.network, "Stored network name");
  analyze->add_option("--power-steps", analyze_options.power_steps, "Power steps from the stored state")
      ->check(CLI::PositiveNumber);
  analyze->add_option("--pairs", analyze_options.pairs, "Input pairs for the empirical estimate")
      ->check(CLI::PositiveNumber);

  bool inject_fault = false, zero_layer = false;
  auto* gradcheck = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
  add_common(gradcheck, grad_flags, false);
  gradcheck->add_flag("--inject-fault", inject_fault, "Negative control: corrupt the analytic gradient");
  gradcheck->add_flag("--zero-layer", zero_layer, "Zero the middle layer's weight");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_flags);
    if (*sweep) return cmd_sweep(sweep_flags);
    if (*analyze) return cmd_analyze(analyze_flags, analyze_options);
    if (*gradcheck) return cmd_gradcheck(grad_flags, inject_fault, zero_layer);
  } catch (const snorm::ConfigError& e) {
    return report_error("config", e.what(), e.field(), cli::kExitConfig);
  } catch (const snorm::CheckpointError& e) {
    return report_error("checkpoint", e.what(), "", cli::kExitIo);
  } catch (const snorm::IoError& e) {
    return report_error("io", e.what(), "", cli::kExitIo);
  } catch (const std::filesystem::filesystem_error& e) {
    return report_error("io", e.what(), "", cli::kExitIo);
  } catch (const snorm::Error& e) {
    return report_error("runtime", e.what(), "", cli::kExitConfig);
  }
  return cli::kExitOk;
}
