#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "snorm/net/network.hpp"
#include "snorm/normalizers/kind.hpp"
#include "snorm/training/losses.hpp"
#include "snorm/training/metrics_sink.hpp"
#include "snorm/training/settings.hpp"
#include "snorm/training/toy.hpp"

namespace snorm::training {

struct GanConfig {
  std::vector<net::LayerSpec> generator;
  std::vector<net::LayerSpec> discriminator;
  std::size_t d_z = 128;
  std::size_t batch_size = 64;
  long generator_updates = 5000;
  std::uint64_t seed = 0;
  LossKind loss = StandardAlternate{};
  OptSetting opt = named_setting("C");
  ToyTarget target = GaussianRing{};

  std::string run_id = "run";
  /// Log every `cadence` generator updates (plus the first and last iteration).
  long cadence = 100;
  std::size_t fake_samples = 5000;
  std::size_t real_samples = 10000;
  /// Mode-coverage radius; 0 means three component standard deviations.
  double coverage_threshold = 0.0;
  /// Record elapsed milliseconds; when false wall_ms is 0 so streams are reproducible.
  bool wall_clock = false;
  /// Save a checkpoint every this many generator updates (0 = final only).
  long checkpoint_every = 0;
  /// Empty: no checkpoints.
  std::filesystem::path checkpoint_dir;

  friend bool operator==(const GanConfig&, const GanConfig&) = default;
};

/// Throws ConfigError naming the offending field.
void validate(const GanConfig& config);

/// Hidden-layer MLPs: leaky ReLU (slope 0.1) critic ending in one linear output,
/// ReLU generator ending in a linear map to the data dimension.
std::vector<net::LayerSpec> default_discriminator(std::size_t data_dim,
                                                  const normalizers::NormalizerKind& kind,
                                                  std::size_t hidden = 64, std::size_t depth = 2);
std::vector<net::LayerSpec> default_generator(std::size_t d_z, std::size_t data_dim,
                                              std::size_t hidden = 64, std::size_t depth = 2);

struct TrainReport {
  long generator_updates = 0;
  long discriminator_updates = 0;
  bool collapsed = false;
  std::string collapse_reason;
  MetricRecord final_metrics;
  double inception_score = 0.0;
  std::optional<std::filesystem::path> checkpoint_path;
  net::Network discriminator;
  net::Network generator;
};

/// Alternating training: per generator update, n_dis discriminator updates.
///
/// The discriminator's spectral states advance once per discriminator update;
/// generator steps and metric evaluation use scratch copies. A non-finite loss
/// or generator output stops the run, emits a record with NaN measurements and
/// marks the report collapsed.
TrainReport train_gan(const GanConfig& config, std::span<MetricSink* const> sinks = {});

}  // namespace snorm::training
