#include "snorm/training/gan.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "snorm/error.hpp"
#include "snorm/linalg/decompositions.hpp"
#include "snorm/metrics/coverage.hpp"
#include "snorm/metrics/frechet.hpp"
#include "snorm/metrics/inception.hpp"
#include "snorm/net/checkpoint.hpp"
#include "snorm/net/serialize.hpp"
#include "snorm/normalizers/gradient_penalty.hpp"
#include "snorm/training/adam.hpp"

namespace snorm::training {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Rng derived_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

enum Stream : std::uint64_t { kEvalReal = 1, kEvalIter = 2, kClassifier = 3 };

template <class F>
void rethrow_as_config(const std::string& field, F f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(field, e.what());
  }
}

std::vector<Matrix> values(const std::vector<ad::Var>& vars) {
  std::vector<Matrix> out;
  out.reserve(vars.size());
  for (const ad::Var& v : vars) out.push_back(v.value());
  return out;
}

Matrix generate(const net::Network& g, std::size_t n, std::size_t d_z, Rng& rng) {
  return net::predict(g, Matrix::gaussian(n, d_z, rng));
}

class Trainer {
 public:
  Trainer(const GanConfig& config, std::span<MetricSink* const> sinks)
      : config_(config), sinks_(sinks), rng_(config.seed), start_(std::chrono::steady_clock::now()) {
    discriminator_ = net::Network(config.discriminator, rng_);
    generator_ = net::Network(config.generator, rng_);
    threshold_ = config.coverage_threshold > 0.0 ? config.coverage_threshold
                                                 : metrics::default_coverage_threshold(config.target);
    Rng real_rng = derived_rng(config.seed, kEvalReal);
    real_fit_ = metrics::fit_gaussian(sample_toy(config.target, config.real_samples, real_rng).samples);
  }

  TrainReport run() {
    TrainReport report;
    if (!log(0, report)) return finish(report);
    for (long it = 1; it <= config_.generator_updates; ++it) {
      for (int k = 0; k < config_.opt.n_dis; ++k) {
        if (!discriminator_step(report)) return finish(report);
        ++report.discriminator_updates;
      }
      if (!generator_step(report)) return finish(report);
      ++report.generator_updates;
      const bool last = it == config_.generator_updates;
      if (last || it % config_.cadence == 0) {
        if (!log(it, report)) return finish(report);
      }
      if (config_.checkpoint_every > 0 && it % config_.checkpoint_every == 0 && !last) {
        save(it, "iter_" + std::to_string(it) + ".ckpt.json");
      }
    }
    return finish(report);
  }

 private:
  bool discriminator_step(TrainReport& report) {
    const Matrix real = sample_toy(config_.target, config_.batch_size, rng_).samples;
    const Matrix fake = generate(generator_, config_.batch_size, config_.d_z, rng_);
    const net::BoundNetwork d = net::bind(discriminator_, rng_, {net::SpectralUpdate::persist});
    ad::Var loss = discriminator_objective(config_.loss, d.forward(ad::constant(real)),
                                           d.forward(ad::constant(fake)));
    loss = ad::add(loss, d.penalty());
    if (const auto* gp = std::get_if<WganGp>(&config_.loss)) {
      const auto eps = normalizers::draw_interpolation_weights(real.rows(), rng_);
      loss = ad::add(loss, normalizers::gradient_penalty(d, real, fake, gp->lambda, eps));
    }
    if (!std::isfinite(loss.item())) return collapse(report, "non-finite discriminator loss");
    const auto grads = values(ad::grad(loss, d.parameters()));
    adam_step(discriminator_.parameters(), grads, d_moments_, config_.opt.adam, ++d_steps_);
    discriminator_.project();
    return true;
  }

  bool generator_step(TrainReport& report) {
    const Matrix z = Matrix::gaussian(config_.batch_size, config_.d_z, rng_);
    const net::BoundNetwork g = net::bind(generator_, rng_, {net::SpectralUpdate::persist});
    net::BindOptions frozen;
    frozen.requires_grad = false;
    const net::BoundNetwork d = net::bind(discriminator_, frozen);
    const ad::Var loss = generator_objective(config_.loss, d.forward(g.forward(ad::constant(z))));
    if (!std::isfinite(loss.item())) return collapse(report, "non-finite generator loss");
    const auto grads = values(ad::grad(loss, g.parameters()));
    adam_step(generator_.parameters(), grads, g_moments_, config_.opt.adam, ++g_steps_);
    generator_.project();
    return true;
  }

  // Measurements draw from their own stream so logging never perturbs training.
  bool log(long iter, TrainReport& report) {
    ad::NoGradGuard no_grad;
    Rng eval = derived_rng(config_.seed, kEvalIter, static_cast<std::uint64_t>(iter));
    MetricRecord r = base_record(iter);
    const Matrix real = sample_toy(config_.target, config_.batch_size, eval).samples;
    const Matrix fake = generate(generator_, config_.fake_samples, config_.d_z, eval);
    if (!fake.all_finite()) return collapse(report, "non-finite generator output");
    const Matrix batch_fake(config_.batch_size, fake.cols(),
                            std::vector<double>(fake.values().begin(),
                                                fake.values().begin() + static_cast<long>(config_.batch_size * fake.cols())));
    net::BindOptions opts;
    opts.requires_grad = false;
    const net::BoundNetwork d = net::bind(discriminator_, opts);
    const ad::Var d_fake = d.forward(ad::constant(batch_fake));
    r.loss_d = discriminator_objective(config_.loss, d.forward(ad::constant(real)), d_fake).item();
    r.loss_g = generator_objective(config_.loss, d_fake).item();
    for (std::size_t i = 0; i < d.num_layers(); ++i) {
      r.sigma.push_back(linalg::singular_values(d.effective_weight(i).value()).front());
    }
    r.frechet = metrics::frechet_distance(real_fit_, metrics::fit_gaussian(fake));
    r.mode_coverage = metrics::mode_coverage(fake, config_.target, threshold_).covered;
    if (!std::isfinite(r.loss_d) || !std::isfinite(r.loss_g)) return collapse(report, "non-finite evaluation loss");
    emit(r);
    report.final_metrics = r;
    last_fake_ = fake;
    return true;
  }

  MetricRecord base_record(long iter) const {
    MetricRecord r;
    r.run_id = config_.run_id;
    r.iter = iter;
    if (config_.wall_clock) {
      r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }
    return r;
  }

  bool collapse(TrainReport& report, const std::string& reason) {
    report.collapsed = true;
    report.collapse_reason = reason + " after " + std::to_string(report.generator_updates) +
                             " generator updates";
    MetricRecord r = base_record(report.generator_updates);
    r.loss_d = r.loss_g = r.frechet = kNaN;
    emit(r);
    report.final_metrics = r;
    return false;
  }

  void emit(const MetricRecord& r) {
    for (MetricSink* s : sinks_) s->write(r);
  }

  std::filesystem::path save(long iter, const std::string& name) {
    net::Checkpoint ckpt;
    ckpt.iteration = static_cast<std::uint64_t>(iter);
    ckpt.rng_state = io::rng_state(rng_);
    ckpt.networks.emplace("discriminator", discriminator_);
    ckpt.networks.emplace("generator", generator_);
    const auto path = config_.checkpoint_dir / name;
    net::save_checkpoint(ckpt, path);
    return path;
  }

  TrainReport finish(TrainReport& report) {
    if (!report.collapsed && last_fake_.rows() > 0) {
      const auto classifier =
          metrics::train_mode_classifier(config_.target, derived_rng(config_.seed, kClassifier)());
      report.inception_score = metrics::inception_style_score(classifier.probabilities(last_fake_));
    } else {
      report.inception_score = kNaN;
    }
    if (!config_.checkpoint_dir.empty()) {
      report.checkpoint_path = save(report.generator_updates, "final.ckpt.json");
    }
    report.discriminator = discriminator_;
    report.generator = generator_;
    return report;
  }

  const GanConfig& config_;
  std::span<MetricSink* const> sinks_;
  Rng rng_;
  std::chrono::steady_clock::time_point start_;
  net::Network discriminator_, generator_;
  AdamMoments d_moments_, g_moments_;
  long d_steps_ = 0, g_steps_ = 0;
  double threshold_ = 0.0;
  metrics::GaussianFit real_fit_;
  Matrix last_fake_;
};

}  // namespace

void validate(const GanConfig& c) {
  if (c.discriminator.empty()) throw ConfigError("discriminator", "no layers");
  if (c.generator.empty()) throw ConfigError("generator", "no layers");
  rethrow_as_config("target", [&] { validate(c.target); });
  rethrow_as_config("loss", [&] { validate(c.loss); });
  rethrow_as_config("opt", [&] { validate(c.opt); });
  if (c.d_z == 0) throw ConfigError("d_z", "must be >= 1");
  if (c.batch_size == 0) throw ConfigError("batch_size", "must be >= 1");
  if (c.generator_updates < 0) throw ConfigError("generator_updates", "must be >= 0");
  if (c.cadence < 1) throw ConfigError("cadence", "must be >= 1");
  if (c.checkpoint_every < 0) throw ConfigError("checkpoint_every", "must be >= 0");
  if (c.fake_samples < 2 || c.fake_samples < c.batch_size) {
    throw ConfigError("fake_samples", "must be >= 2 and >= batch_size");
  }
  if (c.real_samples < 2) throw ConfigError("real_samples", "must be >= 2");
  if (c.coverage_threshold < 0.0) throw ConfigError("coverage_threshold", "must be >= 0");
  const std::size_t dim = data_dim(c.target);
  auto check_net = [&](const std::vector<net::LayerSpec>& specs, const std::string& field) {
    for (std::size_t i = 0; i < specs.size(); ++i) {
      rethrow_as_config(field + "[" + std::to_string(i) + "]", [&] { net::validate(specs[i]); });
      if (i + 1 < specs.size() && specs[i].output_dim() != specs[i + 1].input_dim()) {
        throw ConfigError(field + "[" + std::to_string(i + 1) + "]", "input does not match previous layer");
      }
    }
  };
  check_net(c.discriminator, "discriminator");
  check_net(c.generator, "generator");
  if (c.generator.front().input_dim() != c.d_z) throw ConfigError("generator[0]", "input must equal d_z");
  if (c.generator.back().output_dim() != dim) throw ConfigError("generator", "output must equal the data dimension");
  if (c.discriminator.front().input_dim() != dim) throw ConfigError("discriminator[0]", "input must equal the data dimension");
  if (c.discriminator.back().output_dim() != 1) throw ConfigError("discriminator", "must end in one output");
}

std::vector<net::LayerSpec> default_discriminator(std::size_t data_dim,
                                                  const normalizers::NormalizerKind& kind,
                                                  std::size_t hidden, std::size_t depth) {
  std::vector<net::LayerSpec> specs;
  std::size_t in = data_dim;
  for (std::size_t i = 0; i < depth; ++i) {
    specs.push_back(net::dense_layer(in, hidden, net::Activation::leaky_relu(0.1), kind));
    in = hidden;
  }
  specs.push_back(net::dense_layer(in, 1, net::Activation::identity(), kind));
  return specs;
}

std::vector<net::LayerSpec> default_generator(std::size_t d_z, std::size_t data_dim, std::size_t hidden,
                                              std::size_t depth) {
  std::vector<net::LayerSpec> specs;
  std::size_t in = d_z;
  for (std::size_t i = 0; i < depth; ++i) {
    specs.push_back(net::dense_layer(in, hidden, net::Activation::relu()));
    in = hidden;
  }
  specs.push_back(net::dense_layer(in, data_dim, net::Activation::identity()));
  return specs;
}

TrainReport train_gan(const GanConfig& config, std::span<MetricSink* const> sinks) {
  validate(config);
  Trainer trainer(config, sinks);
  return trainer.run();
}

}  // namespace snorm::training
