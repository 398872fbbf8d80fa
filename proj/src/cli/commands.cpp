#include "snorm/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "snorm/error.hpp"
#include "snorm/net/checkpoint.hpp"
#include "snorm/net/lipschitz.hpp"
#include "snorm/normalizers/gradient_penalty.hpp"

namespace snorm::cli {

namespace fs = std::filesystem;
using io::Json;
using linalg::Matrix;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

void remove_path(const fs::path& path) {
  std::error_code ec;
  fs::remove_all(path, ec);
  if (ec) throw IoError("cannot remove " + path.string());
}

Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json to_json(const training::MetricRecord& r) {
  Json sigma = Json::array();
  for (double s : r.sigma) sigma.push_back(number_or_null(s));
  return Json{{"iter", r.iter},
              {"loss_d", number_or_null(r.loss_d)},
              {"loss_g", number_or_null(r.loss_g)},
              {"sigma", std::move(sigma)},
              {"frechet", number_or_null(r.frechet)},
              {"mode_coverage", r.mode_coverage}};
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

Json to_json(const RunManifest& m) {
  return Json{{"run_id", m.run_id},
              {"config_hash", m.config_hash},
              {"seed", m.seed},
              {"library_version", m.library_version},
              {"started_at", m.started_at},
              {"finished_at", m.finished_at},
              {"status", m.status},
              {"collapse_reason", m.collapse_reason},
              {"final_metrics", to_json(m.final_metrics)},
              {"inception_score", number_or_null(m.inception_score)},
              {"files", m.files}};
}

RunResult run_experiment(const ExperimentConfig& config) {
  training::validate(config.gan);
  const fs::path dir = config.out_dir;
  make_dirs(dir);
  const fs::path ckpt_dir = dir / "checkpoints";
  for (const char* name : {"metrics.csv", "metrics.jsonl", "manifest.json"}) remove_path(dir / name);
  remove_path(ckpt_dir);
  make_dirs(ckpt_dir);

  RunResult result;
  RunManifest& m = result.manifest;
  m.run_id = config.gan.run_id;
  m.config_hash = config_hash(config);
  m.seed = config.gan.seed;
  m.library_version = SNORM_VERSION;
  m.started_at = utc_now();
  write_text(dir / "config.json", serialize_config(config));

  training::GanConfig gan = config.gan;
  gan.checkpoint_dir = ckpt_dir;
  {
    training::CsvSink csv(dir / "metrics.csv");
    training::JsonlSink jsonl(dir / "metrics.jsonl");
    training::MetricSink* sinks[] = {&csv, &jsonl};
    result.report = training::train_gan(gan, sinks);
  }
  m.finished_at = utc_now();
  m.status = result.report.collapsed ? "collapsed" : "completed";
  m.collapse_reason = result.report.collapse_reason;
  m.final_metrics = result.report.final_metrics;
  m.inception_score = result.report.inception_score;

  m.files = {"config.json", "metrics.csv", "metrics.jsonl"};
  std::vector<std::string> ckpts;
  for (const auto& entry : fs::directory_iterator(ckpt_dir)) {
    ckpts.push_back((fs::path("checkpoints") / entry.path().filename()).generic_string());
  }
  std::sort(ckpts.begin(), ckpts.end());
  m.files.insert(m.files.end(), ckpts.begin(), ckpts.end());
  m.files.push_back("manifest.json");
  write_text(dir / "manifest.json", to_json(m).dump(2) + "\n");
  result.exit_code = result.report.collapsed ? kExitCollapse : kExitOk;
  return result;
}

std::string sweep_run_id(const SweepMethod& method, const std::string& setting, std::uint64_t seed) {
  return method.name + "_" + setting + "_s" + std::to_string(seed);
}

ExperimentConfig sweep_run_config(const ExperimentConfig& base, const SweepMethod& method,
                                  const std::string& setting, std::uint64_t seed) {
  ExperimentConfig c = base;
  for (auto& layer : c.gan.discriminator) layer.normalizer = method.normalizer;
  c.gan.loss = method.loss;
  c.gan.opt = training::named_setting(setting);
  c.gan.seed = seed;
  c.gan.run_id = sweep_run_id(method, setting, seed);
  c.out_dir = base.out_dir / "runs" / c.gan.run_id;
  c.jobs = 1;
  return c;
}

std::string sweep_rows_csv(const std::vector<SweepRow>& rows) {
  std::string out = "method,setting,seed,run_id,status,frechet,mode_coverage,inception_score\n";
  for (const auto& r : rows) {
    out += r.method + "," + r.setting + "," + std::to_string(r.seed) + "," + r.run_id + "," +
           (r.collapsed ? "collapsed" : "completed") + "," + fmt(r.frechet) + "," +
           std::to_string(r.mode_coverage) + "," + fmt(r.inception_score) + "\n";
  }
  return out;
}

std::string sweep_cells_csv(const std::vector<SweepCell>& cells) {
  std::string out =
      "method,setting,seeds,collapsed,frechet_mean,mode_coverage_mean,mode_coverage_min,mode_coverage_max\n";
  for (const auto& c : cells) {
    out += c.method + "," + c.setting + "," + std::to_string(c.seeds) + "," + std::to_string(c.collapsed) +
           "," + fmt(c.frechet_mean) + "," + fmt(c.mode_coverage_mean) + "," +
           std::to_string(c.mode_coverage_min) + "," + std::to_string(c.mode_coverage_max) + "\n";
  }
  return out;
}

SweepResult run_sweep(const ExperimentConfig& config) {
  const SweepPlan& plan = config.sweep;
  if (plan.methods.empty()) throw ConfigError("sweep.methods", "must not be empty");
  if (plan.settings.empty()) throw ConfigError("sweep.settings", "must not be empty");
  if (plan.seeds.empty()) throw ConfigError("sweep.seeds", "must not be empty");

  std::vector<ExperimentConfig> runs;
  SweepResult result;
  for (const auto& method : plan.methods) {
    for (const auto& setting : plan.settings) {
      for (std::uint64_t seed : plan.seeds) {
        runs.push_back(sweep_run_config(config, method, setting, seed));
        training::validate(runs.back().gan);
        result.rows.push_back(SweepRow{method.name, setting, seed, runs.back().gan.run_id});
      }
    }
  }
  make_dirs(config.out_dir);

  // Workers own their run; results land in preassigned slots.
  std::atomic<std::size_t> next{0};
  std::vector<RunManifest> manifests(runs.size());
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      try {
        manifests[i] = run_experiment(runs[i]).manifest;
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next = runs.size();
      }
    }
  };
  const std::size_t jobs = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, config.jobs)), runs.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  for (std::size_t i = 0; i < runs.size(); ++i) {
    SweepRow& row = result.rows[i];
    row.collapsed = manifests[i].status == "collapsed";
    row.frechet = row.collapsed ? kNaN : manifests[i].final_metrics.frechet;
    row.mode_coverage = row.collapsed ? 0 : manifests[i].final_metrics.mode_coverage;
    row.inception_score = manifests[i].inception_score;
    for (const auto& f : manifests[i].files) {
      result.files.push_back((fs::path("runs") / row.run_id / f).generic_string());
    }
  }
  const std::size_t per_cell = plan.seeds.size();
  for (std::size_t start = 0; start < result.rows.size(); start += per_cell) {
    SweepCell cell;
    cell.method = result.rows[start].method;
    cell.setting = result.rows[start].setting;
    cell.seeds = per_cell;
    cell.mode_coverage_min = std::numeric_limits<int>::max();
    cell.mode_coverage_max = 0;
    double frechet = 0.0, coverage = 0.0;
    for (std::size_t i = start; i < start + per_cell; ++i) {
      const SweepRow& r = result.rows[i];
      coverage += r.mode_coverage;
      cell.mode_coverage_min = std::min(cell.mode_coverage_min, r.mode_coverage);
      cell.mode_coverage_max = std::max(cell.mode_coverage_max, r.mode_coverage);
      if (r.collapsed) {
        ++cell.collapsed;
      } else {
        frechet += r.frechet;
      }
    }
    cell.mode_coverage_mean = coverage / static_cast<double>(per_cell);
    cell.frechet_mean = cell.collapsed == per_cell ? kNaN : frechet / static_cast<double>(per_cell - cell.collapsed);
    result.cells.push_back(cell);
  }

  write_text(config.out_dir / "config.json", serialize_config(config));
  write_text(config.out_dir / "sweep_runs.csv", sweep_rows_csv(result.rows));
  write_text(config.out_dir / "sweep.csv", sweep_cells_csv(result.cells));
  result.files.insert(result.files.begin(), {"config.json", "sweep_runs.csv", "sweep.csv"});
  result.files.push_back("sweep_manifest.json");
  const Json manifest{{"config_hash", config_hash(config)},
                      {"library_version", SNORM_VERSION},
                      {"runs", result.rows.size()},
                      {"cells", result.cells.size()},
                      {"files", result.files}};
  write_text(config.out_dir / "sweep_manifest.json", manifest.dump(2) + "\n");
  return result;
}

AnalyzeReport analyze_checkpoint(const AnalyzeOptions& options) {
  const net::Checkpoint ckpt = net::load_checkpoint(options.checkpoint);
  AnalyzeReport report;
  if (!options.network.empty()) {
    report.network = options.network;
  } else if (ckpt.networks.count("discriminator")) {
    report.network = "discriminator";
  } else if (ckpt.networks.size() == 1) {
    report.network = ckpt.networks.begin()->first;
  } else {
    throw CheckpointError("checkpoint holds several networks and none is named discriminator");
  }
  const auto it = ckpt.networks.find(report.network);
  if (it == ckpt.networks.end()) throw CheckpointError("checkpoint has no network '" + report.network + "'");
  const net::Network& network = it->second;

  report.spectrum = metrics::spectrum_report(network, options.power_steps);
  try {
    report.lipschitz_upper_bound = net::lipschitz_upper_bound(network, options.power_steps);
  } catch (const DomainError&) {
    report.lipschitz_upper_bound.reset();
  }
  // Half the pairs are independent draws, half are local perturbations.
  Rng rng(options.seed);
  const std::size_t n = std::max<std::size_t>(options.pairs, 2);
  const std::size_t d = network.input_dim();
  Matrix x = Matrix::gaussian(n, d, rng);
  Matrix x_prime = Matrix::gaussian(n, d, rng);
  for (std::size_t i = n / 2; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) x_prime(i, j) = x(i, j) + 1e-3 * x_prime(i, j);
  }
  report.empirical_lipschitz = net::empirical_lipschitz(network, x, x_prime, options.power_steps);

  make_dirs(options.out_dir);
  write_text(options.out_dir / "spectrum.json", metrics::to_json(report.spectrum).dump(2) + "\n");
  write_text(options.out_dir / "spectrum.csv", metrics::spectrum_csv(report.spectrum));
  report.files = {"spectrum.json", "spectrum.csv", "analysis.json"};
  const Json analysis{
      {"checkpoint", options.checkpoint.string()},
      {"network", report.network},
      {"iteration", ckpt.iteration},
      {"power_steps", options.power_steps},
      {"pairs", n},
      {"spectrum", metrics::to_json(report.spectrum)},
      {"lipschitz_upper_bound",
       report.lipschitz_upper_bound ? Json(*report.lipschitz_upper_bound) : Json(nullptr)},
      {"empirical_lipschitz", report.empirical_lipschitz},
      {"files", report.files}};
  write_text(options.out_dir / "analysis.json", analysis.dump(2) + "\n");
  return report;
}

std::vector<GradcheckCase> run_gradcheck(const GradcheckPlan& plan, std::uint64_t seed) {
  std::vector<GradcheckCase> cases;
  const std::size_t d_in = 3;
  for (const auto& kind : plan.kinds) {
    for (const auto& loss : plan.losses) {
      Rng rng(seed);
      net::Network critic({net::dense_layer(d_in, plan.width, net::Activation::tanh(), kind),
                           net::dense_layer(plan.width, plan.width, net::Activation::leaky_relu(0.2), kind),
                           net::dense_layer(plan.width, 1, net::Activation::identity(), kind)},
                          rng);
      if (plan.zero_layer) {
        // A nonzero bias keeps the next activation off its kink for kinds that do not divide.
        critic.layer(1).weight = Matrix(plan.width, plan.width);
        critic.layer(1).bias = Matrix(1, plan.width, 0.3);
      }
      const Matrix real = Matrix::gaussian(plan.batch, d_in, rng);
      const Matrix fake = Matrix::gaussian(plan.batch, d_in, rng);
      const auto eps = normalizers::draw_interpolation_weights(plan.batch, rng);
      auto objective = [&](const net::BoundNetwork& d) {
        ad::Var value = training::discriminator_objective(loss, d.forward(ad::constant(real)),
                                                          d.forward(ad::constant(fake)));
        value = ad::add(value, d.penalty());
        if (const auto* gp = std::get_if<training::WganGp>(&loss)) {
          value = ad::add(value, normalizers::gradient_penalty(d, real, fake, gp->lambda, eps));
        }
        return value;
      };
      net::GradCheckOptions options;
      options.tolerance = plan.tolerance;
      options.inject_fault = plan.inject_fault;
      cases.push_back(GradcheckCase{normalizers::describe(kind), training::loss_name(loss),
                                    net::finite_difference_check(critic, objective, options)});
    }
  }
  return cases;
}

Json to_json(const std::vector<GradcheckCase>& cases) {
  Json out = Json::array();
  for (const auto& c : cases) {
    Json tensors = Json::array();
    for (const auto& t : c.report.tensors) {
      tensors.push_back(Json{{"name", t.name},
                             {"max_rel_error", t.max_rel_error},
                             {"compared", t.compared},
                             {"below_floor", t.below_floor}});
    }
    out.push_back(Json{{"normalizer", c.normalizer},
                       {"loss", c.loss},
                       {"status", c.report.skipped ? "skipped" : (c.report.passed() ? "pass" : "fail")},
                       {"skip_reason", c.report.skip_reason},
                       {"max_rel_error", c.report.max_rel_error},
                       {"tolerance", c.report.tolerance},
                       {"tensors", std::move(tensors)}});
  }
  return out;
}

}  // namespace snorm::cli
