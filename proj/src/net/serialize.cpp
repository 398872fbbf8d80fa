#include "snorm/net/serialize.hpp"

#include <cmath>
#include <sstream>

#include "snorm/error.hpp"
#include "snorm/overloaded.hpp"

namespace snorm::io {

using normalizers::NormalizerKind;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

const Json& require(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(join(path, key), "missing field");
  return *it;
}

double get_number(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = require(j, key, path);
  if (!v.is_number()) throw ConfigError(join(path, key), "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(join(path, key), "not finite");
  return x;
}

double get_number(const Json& j, const std::string& key, const std::string& path,
                  double fallback) {
  return j.contains(key) ? get_number(j, key, path) : fallback;
}

long get_integer(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = require(j, key, path);
  if (!v.is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
  return v.get<long>();
}

long get_integer(const Json& j, const std::string& key, const std::string& path, long fallback) {
  return j.contains(key) ? get_integer(j, key, path) : fallback;
}

std::string get_string(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = require(j, key, path);
  if (!v.is_string()) throw ConfigError(join(path, key), "expected a string");
  return v.get<std::string>();
}

std::string get_string(const Json& j, const std::string& key, const std::string& path,
                       const std::string& fallback) {
  return j.contains(key) ? get_string(j, key, path) : fallback;
}

bool get_bool(const Json& j, const std::string& key, const std::string& path, bool fallback) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError(join(path, key), "expected true or false");
  return v.get<bool>();
}

namespace {

std::size_t get_size(const Json& j, const std::string& key, const std::string& path,
                     std::optional<std::size_t> fallback = std::nullopt) {
  if (fallback && !j.contains(key)) return *fallback;
  const long v = get_integer(j, key, path);
  if (v < 0) throw ConfigError(join(path, key), "must be non-negative");
  return static_cast<std::size_t>(v);
}

int get_int(const Json& j, const std::string& key, const std::string& path, int fallback) {
  return static_cast<int>(get_integer(j, key, path, fallback));
}

Json vec_to_json(const std::vector<double>& v) { return Json(v); }

std::vector<double> vec_from_json(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(path + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(j[i].get<double>());
  }
  return out;
}

}  // namespace

Json to_json(const NormalizerKind& kind) {
  Json j;
  j["kind"] = normalizers::kind_name(kind);
  std::visit(overloaded{
                 [&](const normalizers::Spectral& s) { j["n_power"] = s.n_power; },
                 [&](const normalizers::SpectralReparam& s) {
                   j["gamma"] = s.gamma_init;
                   j["n_power"] = s.n_power;
                 },
                 [&](const normalizers::Clip& c) { j["c"] = c.c; },
                 [&](const normalizers::Orthonormal& o) { j["beta"] = o.beta; },
                 [](const auto&) {},
             },
             kind);
  return j;
}

NormalizerKind normalizer_from_json(const Json& j, const std::string& path) {
  if (j.is_string()) {
    Json wrapped;
    wrapped["kind"] = j;
    return normalizer_from_json(wrapped, path);
  }
  const std::string kind = get_string(j, "kind", path);
  NormalizerKind out;
  if (kind == "none") {
    out = normalizers::NoNormalizer{};
  } else if (kind == "spectral") {
    out = normalizers::Spectral{get_int(j, "n_power", path, 1)};
  } else if (kind == "spectral_reparam") {
    out = normalizers::SpectralReparam{get_number(j, "gamma", path, 1.0),
                                       get_int(j, "n_power", path, 1)};
  } else if (kind == "weight_norm") {
    out = normalizers::WeightNorm{};
  } else if (kind == "frobenius") {
    out = normalizers::Frobenius{};
  } else if (kind == "clip") {
    out = normalizers::Clip{get_number(j, "c", path, 0.01)};
  } else if (kind == "orthonormal") {
    out = normalizers::Orthonormal{get_number(j, "beta", path, 1e-4)};
  } else {
    throw ConfigError(join(path, "kind"), "unknown normalizer '" + kind + "'");
  }
  try {
    normalizers::validate(out);
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
  return out;
}

Json to_json(const net::LayerSpec& spec) {
  Json j;
  std::visit(overloaded{
                 [&](const net::Dense& d) {
                   j["type"] = "dense";
                   j["d_in"] = d.d_in;
                   j["d_out"] = d.d_out;
                 },
                 [&](const net::Conv2d& c) {
                   j["type"] = "conv2d";
                   j["d_in"] = c.d_in;
                   j["d_out"] = c.d_out;
                   j["h"] = c.h;
                   j["w"] = c.w;
                   j["stride"] = c.stride;
                   j["padding"] = c.padding;
                   j["in_height"] = c.in_height;
                   j["in_width"] = c.in_width;
                 },
             },
             spec.kind);
  j["activation"] = net::activation_name(spec.activation.kind);
  if (spec.activation.kind == net::ActivationKind::leaky_relu) j["slope"] = spec.activation.slope;
  j["normalizer"] = to_json(spec.normalizer);
  j["bias"] = spec.has_bias;
  return j;
}

net::LayerSpec layer_from_json(const Json& j, const std::string& path) {
  net::LayerSpec spec;
  const std::string type = get_string(j, "type", path, "dense");
  if (type == "dense") {
    spec.kind = net::Dense{get_size(j, "d_in", path), get_size(j, "d_out", path)};
  } else if (type == "conv2d") {
    net::Conv2d c;
    c.d_in = get_size(j, "d_in", path);
    c.d_out = get_size(j, "d_out", path);
    c.h = get_size(j, "h", path);
    c.w = get_size(j, "w", path);
    c.stride = get_size(j, "stride", path, 1);
    c.padding = get_size(j, "padding", path, 0);
    c.in_height = get_size(j, "in_height", path);
    c.in_width = get_size(j, "in_width", path);
    spec.kind = c;
  } else {
    throw ConfigError(join(path, "type"), "unknown layer type '" + type + "'");
  }
  const std::string act = get_string(j, "activation", path, "identity");
  try {
    spec.activation.kind = net::parse_activation(act);
  } catch (const DomainError& e) {
    throw ConfigError(join(path, "activation"), e.what());
  }
  spec.activation.slope = get_number(j, "slope", path, 0.1);
  spec.normalizer = j.contains("normalizer") ? normalizer_from_json(j.at("normalizer"), join(path, "normalizer"))
                                             : NormalizerKind{};
  spec.has_bias = get_bool(j, "bias", path, true);
  try {
    net::validate(spec);
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
  return spec;
}

Json to_json(const linalg::Matrix& m) {
  Json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["values"] = std::vector<double>(m.values().begin(), m.values().end());
  return j;
}

linalg::Matrix matrix_from_json(const Json& j, const std::string& path) {
  const std::size_t rows = get_size(j, "rows", path), cols = get_size(j, "cols", path);
  std::vector<double> values = vec_from_json(require(j, "values", path), join(path, "values"));
  if (values.size() != rows * cols) throw ConfigError(join(path, "values"), "length does not match rows x cols");
  return linalg::Matrix(rows, cols, std::move(values));
}

Json to_json(const net::Network& net) {
  Json layers = Json::array();
  for (std::size_t i = 0; i < net.num_layers(); ++i) {
    const net::LayerParams& p = net.layer(i);
    Json l;
    l["spec"] = to_json(net.specs()[i]);
    l["weight"] = to_json(p.weight);
    if (!p.bias.empty()) l["bias"] = to_json(p.bias);
    if (!p.gamma.empty()) l["gamma"] = to_json(p.gamma);
    if (!p.spectral.u_tilde.empty()) {
      l["spectral"] = {{"u_tilde", vec_to_json(p.spectral.u_tilde)},
                       {"v_tilde", vec_to_json(p.spectral.v_tilde)},
                       {"last_sigma", p.spectral.last_sigma}};
    }
    layers.push_back(std::move(l));
  }
  return Json{{"layers", std::move(layers)}};
}

net::Network network_from_json(const Json& j, const std::string& path) {
  const Json& layers = require(j, "layers", path);
  if (!layers.is_array()) throw ConfigError(join(path, "layers"), "expected an array");
  std::vector<net::LayerSpec> specs;
  std::vector<net::LayerParams> params;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string lp = join(path, "layers") + "[" + std::to_string(i) + "]";
    const Json& l = layers[i];
    specs.push_back(layer_from_json(require(l, "spec", lp), join(lp, "spec")));
    net::LayerParams p;
    p.weight = matrix_from_json(require(l, "weight", lp), join(lp, "weight"));
    if (l.contains("bias")) p.bias = matrix_from_json(l.at("bias"), join(lp, "bias"));
    if (l.contains("gamma")) p.gamma = matrix_from_json(l.at("gamma"), join(lp, "gamma"));
    if (l.contains("spectral")) {
      const Json& s = l.at("spectral");
      const std::string sp = join(lp, "spectral");
      p.spectral.u_tilde = vec_from_json(require(s, "u_tilde", sp), join(sp, "u_tilde"));
      p.spectral.v_tilde = vec_from_json(require(s, "v_tilde", sp), join(sp, "v_tilde"));
      p.spectral.last_sigma = get_number(s, "last_sigma", sp, 0.0);
    }
    params.push_back(std::move(p));
  }
  try {
    return net::Network::from_parts(std::move(specs), std::move(params));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
}

std::string rng_state(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

Rng rng_from_state(const std::string& text) {
  std::istringstream is(text);
  Rng rng;
  is >> rng;
  if (is.fail()) throw ConfigError("rng", "unreadable generator state");
  return rng;
}

}  // namespace snorm::io
