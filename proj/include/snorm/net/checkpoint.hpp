#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "snorm/net/network.hpp"

namespace snorm::net {

inline constexpr const char* kCheckpointFormat = "snorm-checkpoint";
inline constexpr int kCheckpointVersion = 1;

/// Networks by role ("discriminator", "generator", ...) plus the loop position
/// and generator state needed to resume.
struct Checkpoint {
  std::uint64_t iteration = 0;
  std::string rng_state;
  std::map<std::string, Network> networks;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
/// Throws CheckpointError on malformed or mismatched documents.
Checkpoint parse_checkpoint(const std::string& text);

/// Throws CheckpointError on I/O failure as well.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace snorm::net
