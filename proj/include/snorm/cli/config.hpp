#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "snorm/net/serialize.hpp"
#include "snorm/normalizers/kind.hpp"
#include "snorm/training/gan.hpp"

namespace snorm::cli {

/// One discriminator treatment in a sweep: a normalizer paired with a loss.
struct SweepMethod {
  std::string name;
  normalizers::NormalizerKind normalizer;
  training::LossKind loss;

  friend bool operator==(const SweepMethod&, const SweepMethod&) = default;
};

struct SweepPlan {
  std::vector<SweepMethod> methods;
  std::vector<std::string> settings;
  std::vector<std::uint64_t> seeds;

  friend bool operator==(const SweepPlan&, const SweepPlan&) = default;
};

struct GradcheckPlan {
  std::vector<normalizers::NormalizerKind> kinds;
  std::vector<training::LossKind> losses;
  double tolerance = 1e-4;
  std::size_t width = 5;
  std::size_t batch = 6;
  bool zero_layer = false;
  bool inject_fault = false;

  friend bool operator==(const GradcheckPlan&, const GradcheckPlan&) = default;
};

struct ExperimentConfig {
  training::GanConfig gan;
  std::filesystem::path out_dir = "out";
  int jobs = 1;
  SweepPlan sweep;
  GradcheckPlan gradcheck;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Defaults: 8-mode ring, setting C, standard loss, spectral discriminator,
/// sweep over {spectral, clip(0.01), gradient penalty} x {A, D, E} x seeds {0, 1, 2}.
ExperimentConfig default_config();

/// Parses a JSON document. Missing fields keep their defaults. Throws
/// ConfigError with the dotted path of the offending field.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical form: every field written, layers spelled out.
io::Json config_to_json(const ExperimentConfig& config);
std::string serialize_config(const ExperimentConfig& config);

/// FNV-1a 64 of the canonical serialization, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

io::Json to_json(const training::OptSetting& setting);
training::OptSetting setting_from_json(const io::Json& j, const std::string& path);
io::Json to_json(const training::LossKind& loss);
training::LossKind loss_from_json(const io::Json& j, const std::string& path);
io::Json to_json(const training::ToyTarget& target);
training::ToyTarget target_from_json(const io::Json& j, const std::string& path);

}  // namespace snorm::cli
