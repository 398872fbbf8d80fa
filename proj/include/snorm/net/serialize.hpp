#pragma once

#include <string>

#include "json.hpp"
#include "snorm/linalg/matrix.hpp"
#include "snorm/net/network.hpp"
#include "snorm/normalizers/kind.hpp"

namespace snorm::io {

using Json = nlohmann::ordered_json;

// Parse functions throw ConfigError naming the offending field by its dotted
// path, with `path` as the prefix.

Json to_json(const normalizers::NormalizerKind& kind);
normalizers::NormalizerKind normalizer_from_json(const Json& j, const std::string& path);

Json to_json(const net::LayerSpec& spec);
net::LayerSpec layer_from_json(const Json& j, const std::string& path);

Json to_json(const linalg::Matrix& m);
linalg::Matrix matrix_from_json(const Json& j, const std::string& path);

/// Layer specs, raw parameters and spectral states.
Json to_json(const net::Network& net);
net::Network network_from_json(const Json& j, const std::string& path);

/// Full engine state as text; restores bit-exactly.
std::string rng_state(const Rng& rng);
Rng rng_from_state(const std::string& text);

// Typed field access with path-qualified errors.
const Json& require(const Json& j, const std::string& key, const std::string& path);
double get_number(const Json& j, const std::string& key, const std::string& path);
double get_number(const Json& j, const std::string& key, const std::string& path, double fallback);
long get_integer(const Json& j, const std::string& key, const std::string& path);
long get_integer(const Json& j, const std::string& key, const std::string& path, long fallback);
std::string get_string(const Json& j, const std::string& key, const std::string& path);
std::string get_string(const Json& j, const std::string& key, const std::string& path,
                       const std::string& fallback);
bool get_bool(const Json& j, const std::string& key, const std::string& path, bool fallback);
std::string join(const std::string& path, const std::string& key);

}  // namespace snorm::io
