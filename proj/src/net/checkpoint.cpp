#include "snorm/net/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "snorm/error.hpp"
#include "snorm/net/serialize.hpp"

namespace snorm::net {

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  io::Json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["iteration"] = ckpt.iteration;
  j["rng"] = ckpt.rng_state;
  io::Json nets = io::Json::object();
  for (const auto& [role, net] : ckpt.networks) nets[role] = io::to_json(net);
  j["networks"] = std::move(nets);
  return j.dump(1) + "\n";
}

Checkpoint parse_checkpoint(const std::string& text) {
  io::Json j;
  try {
    j = io::Json::parse(text);
  } catch (const io::Json::exception& e) {
    throw CheckpointError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (io::get_string(j, "format", "") != kCheckpointFormat)
      throw CheckpointError("not a snorm checkpoint");
    if (io::get_integer(j, "version", "") != kCheckpointVersion)
      throw CheckpointError("unsupported checkpoint version");
    Checkpoint ckpt;
    const long it = io::get_integer(j, "iteration", "");
    if (it < 0) throw CheckpointError("negative iteration");
    ckpt.iteration = static_cast<std::uint64_t>(it);
    ckpt.rng_state = io::get_string(j, "rng", "", "");
    if (!ckpt.rng_state.empty()) io::rng_from_state(ckpt.rng_state);
    const io::Json& nets = io::require(j, "networks", "");
    if (!nets.is_object()) throw CheckpointError("networks: expected an object");
    for (const auto& [role, body] : nets.items()) {
      ckpt.networks.emplace(role, io::network_from_json(body, "networks." + role));
    }
    return ckpt;
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("corrupt checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open " + path.string() + " for writing");
  out << serialize_checkpoint(ckpt);
  if (!out) throw CheckpointError("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_checkpoint(buf.str());
}

}  // namespace snorm::net
