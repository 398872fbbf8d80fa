#include "snorm/cli/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "snorm/error.hpp"
#include "snorm/overloaded.hpp"

namespace snorm::cli {

using io::Json;
using io::join;

namespace {

std::string indexed(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const Json& array_field(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = io::require(j, key, path);
  if (!v.is_array()) throw ConfigError(join(path, key), "expected an array");
  return v;
}

std::size_t size_field(const Json& j, const std::string& key, const std::string& path, std::size_t fallback) {
  const long v = io::get_integer(j, key, path, static_cast<long>(fallback));
  if (v < 0) throw ConfigError(join(path, key), "must be non-negative");
  return static_cast<std::size_t>(v);
}

std::vector<net::LayerSpec> layers_from_json(const Json& j, const std::string& path) {
  std::vector<net::LayerSpec> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(io::layer_from_json(j[i], indexed(path, i)));
  return out;
}

Json layers_to_json(const std::vector<net::LayerSpec>& specs) {
  Json out = Json::array();
  for (const auto& s : specs) out.push_back(io::to_json(s));
  return out;
}

// {"layers": [...]} or the shorthand {"hidden", "depth", "normalizer"}.
std::vector<net::LayerSpec> network_from_json(const Json& j, const std::string& path, bool critic,
                                              std::size_t in_dim, std::size_t out_dim) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  if (j.contains("layers")) return layers_from_json(array_field(j, "layers", path), join(path, "layers"));
  const std::size_t hidden = size_field(j, "hidden", path, 64);
  const std::size_t depth = size_field(j, "depth", path, 2);
  if (hidden == 0) throw ConfigError(join(path, "hidden"), "must be >= 1");
  if (critic) {
    normalizers::NormalizerKind kind = normalizers::Spectral{1};
    if (j.contains("normalizer")) kind = io::normalizer_from_json(j.at("normalizer"), join(path, "normalizer"));
    return training::default_discriminator(in_dim, kind, hidden, depth);
  }
  return training::default_generator(in_dim, out_dim, hidden, depth);
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.gan.target = training::GaussianRing{};
  c.gan.generator = training::default_generator(c.gan.d_z, 2);
  c.gan.discriminator = training::default_discriminator(2, normalizers::Spectral{1});
  c.sweep.methods = {
      {"spectral", normalizers::Spectral{1}, training::StandardAlternate{}},
      {"clip", normalizers::Clip{0.01}, training::Wgan{}},
      {"gradient_penalty", normalizers::NoNormalizer{}, training::WganGp{10.0}},
  };
  c.sweep.settings = {"A", "D", "E"};
  c.sweep.seeds = {0, 1, 2};
  c.gradcheck.kinds = {normalizers::NoNormalizer{}, normalizers::Spectral{1},
                       normalizers::SpectralReparam{1.0, 1}, normalizers::WeightNorm{},
                       normalizers::Frobenius{}, normalizers::Clip{0.5},
                       normalizers::Orthonormal{0.1}};
  c.gradcheck.losses = {training::StandardAlternate{}, training::Hinge{}, training::Wgan{},
                        training::WganGp{10.0}};
  return c;
}

Json to_json(const training::OptSetting& s) {
  for (const auto& named : training::all_settings()) {
    if (named == s) return s.name;
  }
  return Json{{"alpha", s.adam.alpha}, {"beta1", s.adam.beta1}, {"beta2", s.adam.beta2},
              {"epsilon", s.adam.epsilon}, {"n_dis", s.n_dis}};
}

training::OptSetting setting_from_json(const Json& j, const std::string& path) {
  if (j.is_string()) {
    try {
      return training::named_setting(j.get<std::string>());
    } catch (const DomainError& e) {
      throw ConfigError(path, e.what());
    }
  }
  if (!j.is_object()) throw ConfigError(path, "expected a setting name A-F or an object");
  training::OptSetting s;
  s.name = "custom";
  s.adam.alpha = io::get_number(j, "alpha", path);
  s.adam.beta1 = io::get_number(j, "beta1", path);
  s.adam.beta2 = io::get_number(j, "beta2", path);
  s.adam.epsilon = io::get_number(j, "epsilon", path, 1e-8);
  s.n_dis = static_cast<int>(io::get_integer(j, "n_dis", path));
  try {
    training::validate(s);
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
  return s;
}

Json to_json(const training::LossKind& loss) {
  if (const auto* gp = std::get_if<training::WganGp>(&loss)) {
    return Json{{"kind", "wgan_gp"}, {"lambda", gp->lambda}};
  }
  return training::loss_name(loss);
}

training::LossKind loss_from_json(const Json& j, const std::string& path) {
  std::string kind;
  if (j.is_string()) {
    kind = j.get<std::string>();
  } else if (j.is_object()) {
    kind = io::get_string(j, "kind", path);
  } else {
    throw ConfigError(path, "expected a loss name or an object");
  }
  if (kind == "standard") return training::StandardAlternate{};
  if (kind == "hinge") return training::Hinge{};
  if (kind == "wgan") return training::Wgan{};
  if (kind == "wgan_gp") {
    const double lambda = j.is_object() ? io::get_number(j, "lambda", path, 10.0) : 10.0;
    if (!(lambda >= 0.0)) throw ConfigError(join(path, "lambda"), "must be >= 0");
    return training::WganGp{lambda};
  }
  throw ConfigError(j.is_object() ? join(path, "kind") : path, "unknown loss '" + kind + "'");
}

Json to_json(const training::ToyTarget& target) {
  return std::visit(overloaded{
                        [](const training::GaussianRing& r) {
                          return Json{{"kind", "ring"}, {"k", r.k}, {"radius", r.radius}, {"sigma", r.sigma}};
                        },
                        [](const training::GaussianGrid& g) {
                          return Json{{"kind", "grid"}, {"k", g.k}, {"spacing", g.spacing}, {"sigma", g.sigma}};
                        },
                        [](const training::LowDimManifold& m) {
                          return Json{{"kind", "manifold"},
                                      {"embedding_dim", m.embedding_dim},
                                      {"sigma", m.sigma},
                                      {"anchors", m.anchors}};
                        },
                    },
                    target);
}

training::ToyTarget target_from_json(const Json& j, const std::string& path) {
  const std::string kind = io::get_string(j, "kind", path);
  training::ToyTarget out;
  if (kind == "ring") {
    training::GaussianRing r;
    out = training::GaussianRing{static_cast<int>(io::get_integer(j, "k", path, r.k)),
                                 io::get_number(j, "radius", path, r.radius),
                                 io::get_number(j, "sigma", path, r.sigma)};
  } else if (kind == "grid") {
    training::GaussianGrid g;
    out = training::GaussianGrid{static_cast<int>(io::get_integer(j, "k", path, g.k)),
                                 io::get_number(j, "spacing", path, g.spacing),
                                 io::get_number(j, "sigma", path, g.sigma)};
  } else if (kind == "manifold") {
    training::LowDimManifold m;
    out = training::LowDimManifold{static_cast<int>(io::get_integer(j, "embedding_dim", path, m.embedding_dim)),
                                   io::get_number(j, "sigma", path, m.sigma),
                                   static_cast<int>(io::get_integer(j, "anchors", path, m.anchors))};
  } else {
    throw ConfigError(join(path, "kind"), "unknown target '" + kind + "'");
  }
  try {
    training::validate(out);
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw ConfigError("<document>", std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("<document>", "expected an object");

  ExperimentConfig c = default_config();
  training::GanConfig& g = c.gan;
  const long seed = io::get_integer(j, "seed", "", 0);
  if (seed < 0) throw ConfigError("seed", "must be non-negative");
  g.seed = static_cast<std::uint64_t>(seed);
  g.run_id = io::get_string(j, "run_id", "", g.run_id);
  g.generator_updates = io::get_integer(j, "generator_updates", "", g.generator_updates);
  g.batch_size = size_field(j, "batch_size", "", g.batch_size);
  g.d_z = size_field(j, "d_z", "", g.d_z);
  if (j.contains("setting")) g.opt = setting_from_json(j.at("setting"), "setting");
  if (j.contains("loss")) g.loss = loss_from_json(j.at("loss"), "loss");
  if (j.contains("target")) g.target = target_from_json(j.at("target"), "target");
  const std::size_t dim = training::data_dim(g.target);
  g.discriminator = network_from_json(j.value("discriminator", Json::object()), "discriminator", true, dim, 1);
  g.generator = network_from_json(j.value("generator", Json::object()), "generator", false, g.d_z, dim);

  if (j.contains("metrics")) {
    const Json& m = j.at("metrics");
    g.cadence = io::get_integer(m, "cadence", "metrics", g.cadence);
    g.fake_samples = size_field(m, "fake_samples", "metrics", g.fake_samples);
    g.real_samples = size_field(m, "real_samples", "metrics", g.real_samples);
    g.coverage_threshold = io::get_number(m, "coverage_threshold", "metrics", g.coverage_threshold);
    g.wall_clock = io::get_bool(m, "wall_clock", "metrics", g.wall_clock);
  }
  if (j.contains("checkpoint")) {
    g.checkpoint_every = io::get_integer(j.at("checkpoint"), "cadence", "checkpoint", g.checkpoint_every);
  }
  c.out_dir = io::get_string(j, "out", "", c.out_dir.string());
  c.jobs = static_cast<int>(io::get_integer(j, "jobs", "", c.jobs));
  if (c.jobs < 1) throw ConfigError("jobs", "must be >= 1");

  if (j.contains("sweep")) {
    const Json& s = j.at("sweep");
    if (s.contains("methods")) {
      c.sweep.methods.clear();
      const Json& ms = array_field(s, "methods", "sweep");
      for (std::size_t i = 0; i < ms.size(); ++i) {
        const std::string p = indexed("sweep.methods", i);
        SweepMethod m;
        m.name = io::get_string(ms[i], "name", p);
        m.normalizer = io::normalizer_from_json(io::require(ms[i], "normalizer", p), join(p, "normalizer"));
        m.loss = ms[i].contains("loss") ? loss_from_json(ms[i].at("loss"), join(p, "loss"))
                                        : training::LossKind{training::StandardAlternate{}};
        c.sweep.methods.push_back(std::move(m));
      }
    }
    if (s.contains("settings")) {
      c.sweep.settings.clear();
      const Json& ss = array_field(s, "settings", "sweep");
      for (std::size_t i = 0; i < ss.size(); ++i) {
        const auto setting = setting_from_json(ss[i], indexed("sweep.settings", i));
        if (setting.name == "custom") throw ConfigError(indexed("sweep.settings", i), "sweeps take named settings A-F");
        c.sweep.settings.push_back(setting.name);
      }
    }
    if (s.contains("seeds")) {
      c.sweep.seeds.clear();
      const Json& ss = array_field(s, "seeds", "sweep");
      for (std::size_t i = 0; i < ss.size(); ++i) {
        if (!ss[i].is_number_integer() || ss[i].get<long>() < 0)
          throw ConfigError(indexed("sweep.seeds", i), "expected a non-negative integer");
        c.sweep.seeds.push_back(ss[i].get<std::uint64_t>());
      }
    }
  }
  if (j.contains("gradcheck")) {
    const Json& gc = j.at("gradcheck");
    GradcheckPlan& plan = c.gradcheck;
    if (gc.contains("kinds")) {
      plan.kinds.clear();
      const Json& ks = array_field(gc, "kinds", "gradcheck");
      for (std::size_t i = 0; i < ks.size(); ++i)
        plan.kinds.push_back(io::normalizer_from_json(ks[i], indexed("gradcheck.kinds", i)));
    }
    if (gc.contains("losses")) {
      plan.losses.clear();
      const Json& ls = array_field(gc, "losses", "gradcheck");
      for (std::size_t i = 0; i < ls.size(); ++i) plan.losses.push_back(loss_from_json(ls[i], indexed("gradcheck.losses", i)));
    }
    plan.tolerance = io::get_number(gc, "tolerance", "gradcheck", plan.tolerance);
    plan.width = size_field(gc, "width", "gradcheck", plan.width);
    plan.batch = size_field(gc, "batch", "gradcheck", plan.batch);
    plan.zero_layer = io::get_bool(gc, "zero_layer", "gradcheck", plan.zero_layer);
    plan.inject_fault = io::get_bool(gc, "inject_fault", "gradcheck", plan.inject_fault);
    if (plan.width == 0 || plan.batch == 0) throw ConfigError("gradcheck", "width and batch must be >= 1");
    if (!(plan.tolerance > 0.0)) throw ConfigError("gradcheck.tolerance", "must be > 0");
  }
  training::validate(g);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

Json config_to_json(const ExperimentConfig& c) {
  const training::GanConfig& g = c.gan;
  Json j;
  j["run_id"] = g.run_id;
  j["seed"] = g.seed;
  j["generator_updates"] = g.generator_updates;
  j["batch_size"] = g.batch_size;
  j["d_z"] = g.d_z;
  j["setting"] = to_json(g.opt);
  j["loss"] = to_json(g.loss);
  j["target"] = to_json(g.target);
  j["discriminator"] = Json{{"layers", layers_to_json(g.discriminator)}};
  j["generator"] = Json{{"layers", layers_to_json(g.generator)}};
  j["metrics"] = Json{{"cadence", g.cadence},
                      {"fake_samples", g.fake_samples},
                      {"real_samples", g.real_samples},
                      {"coverage_threshold", g.coverage_threshold},
                      {"wall_clock", g.wall_clock}};
  j["checkpoint"] = Json{{"cadence", g.checkpoint_every}};
  j["out"] = c.out_dir.string();
  j["jobs"] = c.jobs;
  Json methods = Json::array();
  for (const auto& m : c.sweep.methods) {
    methods.push_back(Json{{"name", m.name}, {"normalizer", io::to_json(m.normalizer)}, {"loss", to_json(m.loss)}});
  }
  j["sweep"] = Json{{"methods", std::move(methods)}, {"settings", c.sweep.settings}, {"seeds", c.sweep.seeds}};
  Json kinds = Json::array(), losses = Json::array();
  for (const auto& k : c.gradcheck.kinds) kinds.push_back(io::to_json(k));
  for (const auto& l : c.gradcheck.losses) losses.push_back(to_json(l));
  j["gradcheck"] = Json{{"kinds", std::move(kinds)},
                        {"losses", std::move(losses)},
                        {"tolerance", c.gradcheck.tolerance},
                        {"width", c.gradcheck.width},
                        {"batch", c.gradcheck.batch},
                        {"zero_layer", c.gradcheck.zero_layer},
                        {"inject_fault", c.gradcheck.inject_fault}};
  return j;
}

std::string serialize_config(const ExperimentConfig& config) { return config_to_json(config).dump(2) + "\n"; }

std::string config_hash(const ExperimentConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(config_to_json(config).dump())));
  return buf;
}

}  // namespace snorm::cli
