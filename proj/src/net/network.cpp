#include "snorm/net/network.hpp"

#include <cmath>
#include <memory>
#include <string>

#include "snorm/error.hpp"
#include "snorm/normalizers/normalize.hpp"
#include "snorm/overloaded.hpp"

namespace snorm::net {

namespace {

using normalizers::NormalizerKind;

int configured_power_steps(const NormalizerKind& kind) {
  if (const auto* s = std::get_if<normalizers::Spectral>(&kind)) return s->n_power;
  if (const auto* s = std::get_if<normalizers::SpectralReparam>(&kind)) return s->n_power;
  return 0;
}

bool is_spectral(const NormalizerKind& kind) { return configured_power_steps(kind) > 0; }

void check_chain(const std::vector<LayerSpec>& specs) {
  if (specs.empty()) throw DomainError("network: no layers");
  for (std::size_t i = 0; i < specs.size(); ++i) {
    validate(specs[i]);
    if (i + 1 < specs.size() && specs[i].output_dim() != specs[i + 1].input_dim()) {
      throw ShapeError("network: layer " + std::to_string(i) + " outputs " +
                       std::to_string(specs[i].output_dim()) + " but layer " +
                       std::to_string(i + 1) + " expects " +
                       std::to_string(specs[i + 1].input_dim()));
    }
  }
}

// Row k of the im2col matrix is one (sample, output position) patch; entries
// are flat indices into the n x (C H W) input, or -1 inside the zero padding.
std::shared_ptr<const std::vector<long>> im2col_index(const Conv2d& c, std::size_t n) {
  const std::size_t oh = c.out_height(), ow = c.out_width();
  const std::size_t patches = oh * ow;
  const std::size_t k = c.d_in * c.h * c.w;
  const std::size_t in_size = c.d_in * c.in_height * c.in_width;
  auto index = std::make_shared<std::vector<long>>(n * patches * k, -1);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const std::size_t row = s * patches + oy * ow + ox;
        for (std::size_t ci = 0; ci < c.d_in; ++ci) {
          for (std::size_t ky = 0; ky < c.h; ++ky) {
            for (std::size_t kx = 0; kx < c.w; ++kx) {
              const long y = static_cast<long>(oy * c.stride + ky) - static_cast<long>(c.padding);
              const long x = static_cast<long>(ox * c.stride + kx) - static_cast<long>(c.padding);
              const std::size_t col = (ci * c.h + ky) * c.w + kx;
              if (y < 0 || x < 0 || y >= static_cast<long>(c.in_height) ||
                  x >= static_cast<long>(c.in_width)) {
                continue;
              }
              (*index)[row * k + col] = static_cast<long>(
                  s * in_size + (ci * c.in_height + static_cast<std::size_t>(y)) * c.in_width +
                  static_cast<std::size_t>(x));
            }
          }
        }
      }
    }
  }
  return index;
}

// (n * P) x C_out -> n x (C_out * P), channel-major per sample.
std::shared_ptr<const std::vector<long>> fold_index(std::size_t n, std::size_t patches,
                                                    std::size_t channels) {
  auto index = std::make_shared<std::vector<long>>(n * channels * patches);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t p = 0; p < patches; ++p)
        (*index)[(s * channels + c) * patches + p] =
            static_cast<long>((s * patches + p) * channels + c);
  return index;
}

ad::Var activate(const ad::Var& z, const Activation& act) {
  switch (act.kind) {
    case ActivationKind::relu:
      return ad::relu(z);
    case ActivationKind::leaky_relu:
      return ad::leaky_relu(z, act.slope);
    case ActivationKind::tanh:
      return ad::tanh(z);
    case ActivationKind::identity:
      break;
  }
  return z;
}

}  // namespace

Network::Network(std::vector<LayerSpec> specs, Rng& rng) : specs_(std::move(specs)) {
  check_chain(specs_);
  params_.reserve(specs_.size());
  for (const LayerSpec& spec : specs_) {
    LayerParams p;
    const std::size_t rows = spec.weight_rows(), cols = spec.weight_cols();
    if (std::holds_alternative<normalizers::Orthonormal>(spec.normalizer)) {
      p.weight = linalg::random_orthonormal(rows, cols, rng);
    } else {
      p.weight = Matrix::gaussian(rows, cols, rng, 1.0 / std::sqrt(static_cast<double>(cols)));
    }
    if (const auto* clip = std::get_if<normalizers::Clip>(&spec.normalizer)) {
      p.weight = normalizers::apply_clip(p.weight, clip->c);
    }
    if (spec.has_bias) p.bias = Matrix(1, rows);
    if (const auto* r = std::get_if<normalizers::SpectralReparam>(&spec.normalizer)) {
      p.gamma = Matrix(1, 1, r->gamma_init);
    }
    if (is_spectral(spec.normalizer)) p.spectral = linalg::make_spectral_state(rows, cols, rng);
    params_.push_back(std::move(p));
  }
}

Network Network::from_parts(std::vector<LayerSpec> specs, std::vector<LayerParams> params) {
  check_chain(specs);
  if (params.size() != specs.size()) throw ShapeError("network: parameter count mismatch");
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const LayerSpec& s = specs[i];
    const LayerParams& p = params[i];
    const std::string where = "network layer " + std::to_string(i) + ": ";
    if (p.weight.rows() != s.weight_rows() || p.weight.cols() != s.weight_cols())
      throw ShapeError(where + "weight shape");
    if (!p.weight.all_finite()) throw DomainError(where + "non-finite weight");
    if (s.has_bias != !p.bias.empty() || (s.has_bias && (p.bias.rows() != 1 ||
                                                         p.bias.cols() != s.weight_rows())))
      throw ShapeError(where + "bias shape");
    const bool reparam = std::holds_alternative<normalizers::SpectralReparam>(s.normalizer);
    if (reparam != (p.gamma.size() == 1)) throw ShapeError(where + "gamma");
    if (is_spectral(s.normalizer) && (p.spectral.u_tilde.size() != s.weight_rows() ||
                                      p.spectral.v_tilde.size() != s.weight_cols()))
      throw ShapeError(where + "spectral state length");
  }
  Network net;
  net.specs_ = std::move(specs);
  net.params_ = std::move(params);
  return net;
}

std::size_t Network::input_dim() const { return specs_.empty() ? 0 : specs_.front().input_dim(); }
std::size_t Network::output_dim() const { return specs_.empty() ? 0 : specs_.back().output_dim(); }

std::vector<Matrix*> Network::parameters() {
  std::vector<Matrix*> out;
  for (LayerParams& p : params_) {
    out.push_back(&p.weight);
    if (!p.bias.empty()) out.push_back(&p.bias);
    if (!p.gamma.empty()) out.push_back(&p.gamma);
  }
  return out;
}

std::vector<const Matrix*> Network::parameters() const {
  std::vector<const Matrix*> out;
  for (const LayerParams& p : params_) {
    out.push_back(&p.weight);
    if (!p.bias.empty()) out.push_back(&p.bias);
    if (!p.gamma.empty()) out.push_back(&p.gamma);
  }
  return out;
}

std::vector<std::string> Network::parameter_names() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const std::string prefix = "layer" + std::to_string(i) + ".";
    out.push_back(prefix + "weight");
    if (!params_[i].bias.empty()) out.push_back(prefix + "bias");
    if (!params_[i].gamma.empty()) out.push_back(prefix + "gamma");
  }
  return out;
}

void Network::project() {
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    if (const auto* clip = std::get_if<normalizers::Clip>(&specs_[i].normalizer)) {
      params_[i].weight = normalizers::apply_clip(params_[i].weight, clip->c);
    }
  }
}

double GradientSet::squared_norm() const {
  double s = 0.0;
  for (const Matrix& t : tensors) {
    const double n = linalg::frobenius_norm(t);
    s += n * n;
  }
  return s;
}

BoundNetwork bind_impl(const Network& net, Network* mutable_net, Rng* rng,
                       const BindOptions& options) {
  BoundNetwork b;
  b.specs_ = net.specs();
  const auto lift = [&](const Matrix& m) {
    return options.requires_grad ? ad::parameter(m) : ad::constant(m);
  };
  for (std::size_t i = 0; i < net.num_layers(); ++i) {
    const LayerSpec& spec = net.specs()[i];
    const LayerParams& p = net.layer(i);
    ad::Var w = lift(p.weight);
    ad::Var bias, gamma;
    b.params_.push_back(w);
    if (!p.bias.empty()) {
      bias = lift(p.bias);
      b.params_.push_back(bias);
    }
    if (!p.gamma.empty()) {
      gamma = lift(p.gamma);
      b.params_.push_back(gamma);
    }

    linalg::SpectralState state;
    if (is_spectral(spec.normalizer)) {
      const int steps =
          options.power_steps > 0 ? options.power_steps : configured_power_steps(spec.normalizer);
      if (w.value().is_zero()) {
        throw ZeroMatrixError("layer " + std::to_string(i) + ": spectral norm of a zero weight");
      }
      if (options.spectral == SpectralUpdate::persist) {
        auto r = linalg::spectral_norm(p.weight, p.spectral, steps, *rng);
        mutable_net->layer(i).spectral = r.state;
        state = std::move(r.state);
      } else {
        Rng restart_rng(0x5eedULL + i);
        state = linalg::spectral_norm(p.weight, p.spectral, steps, restart_rng).state;
      }
    }
    b.effective_.push_back(
        normalizers::normalize(w, spec.normalizer, state, gamma, options.detach_normalizer));
    b.weights_.push_back(std::move(w));
    b.biases_.push_back(std::move(bias));
    b.states_.push_back(std::move(state));
  }
  return b;
}

BoundNetwork bind(Network& net, Rng& rng, BindOptions options) {
  return bind_impl(net, &net, &rng, options);
}

BoundNetwork bind(const Network& net, BindOptions options) {
  if (options.spectral == SpectralUpdate::persist) {
    throw Error("bind: persisting spectral state needs a mutable network");
  }
  return bind_impl(net, nullptr, nullptr, options);
}

ad::Var BoundNetwork::forward(const ad::Var& x, std::vector<ad::Var>* activations) const {
  if (specs_.empty()) throw Error("BoundNetwork::forward: unbound network");
  if (x.cols() != specs_.front().input_dim()) {
    throw ShapeError("forward: batch has " + std::to_string(x.cols()) + " columns, network expects " +
                     std::to_string(specs_.front().input_dim()));
  }
  ad::Var h = x;
  const std::size_t n = x.rows();
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    const LayerSpec& spec = specs_[i];
    ad::Var z;
    if (const auto* conv = std::get_if<Conv2d>(&spec.kind)) {
      const std::size_t patches = conv->out_height() * conv->out_width();
      const std::size_t k = conv->d_in * conv->h * conv->w;
      ad::Var cols = ad::gather(h, im2col_index(*conv, n), n * patches, k);
      z = ad::matmul_nt(cols, effective_[i]);
      if (biases_[i].defined()) z = ad::add_row(z, biases_[i]);
      z = ad::gather(z, fold_index(n, patches, conv->d_out), n, conv->d_out * patches);
    } else {
      z = ad::matmul_nt(h, effective_[i]);
      if (biases_[i].defined()) z = ad::add_row(z, biases_[i]);
    }
    h = activate(z, spec.activation);
    if (activations) activations->push_back(h);
  }
  return h;
}

ad::Var BoundNetwork::penalty() const {
  ad::Var total = ad::constant(0.0);
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    if (const auto* o = std::get_if<normalizers::Orthonormal>(&specs_[i].normalizer)) {
      total = ad::add(total, normalizers::orthonormal_penalty(weights_[i], o->beta));
    }
  }
  return total;
}

std::vector<Matrix> effective_weights(const Network& net, int power_steps) {
  ad::NoGradGuard no_grad;
  BindOptions options;
  options.power_steps = power_steps;
  options.requires_grad = false;
  const BoundNetwork b = bind(net, options);
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < b.num_layers(); ++i) out.push_back(b.effective_weight(i).value());
  return out;
}

ForwardPass record(BoundNetwork bound, const Matrix& batch, std::vector<std::string> names) {
  ForwardPass pass;
  pass.bound_ = std::move(bound);
  pass.input_ = ad::parameter(batch);
  pass.output_ = pass.bound_.forward(pass.input_, &pass.activations_);
  pass.names_ = std::move(names);
  return pass;
}

const Matrix& ForwardPass::output() const {
  if (!recorded()) throw Error("ForwardPass: no forward pass recorded");
  return output_.value();
}

std::vector<Matrix> ForwardPass::activations() const {
  std::vector<Matrix> out;
  for (const ad::Var& a : activations_) out.push_back(a.value());
  return out;
}

GradientSet ForwardPass::backward(const Matrix& upstream) const {
  if (!recorded()) throw Error("ForwardPass::backward called before forward");
  const auto& params = bound_.parameters();
  std::vector<ad::Var> grads = ad::grad(output_, params, upstream);
  GradientSet out;
  out.names = names_;
  for (const ad::Var& g : grads) out.tensors.push_back(g.value());
  return out;
}

Matrix ForwardPass::input_gradient(const Matrix& upstream) const {
  if (!recorded()) throw Error("ForwardPass::input_gradient called before forward");
  const ad::Var inputs[] = {input_};
  return ad::grad(output_, inputs, upstream)[0].value();
}

ForwardPass forward(Network& net, const Matrix& batch, Rng& rng) {
  BindOptions options;
  options.spectral = SpectralUpdate::persist;
  return record(bind(net, rng, options), batch, net.parameter_names());
}

ForwardPass forward(const Network& net, const Matrix& batch, BindOptions options) {
  return record(bind(net, options), batch, net.parameter_names());
}

Matrix predict(const Network& net, const Matrix& batch, BindOptions options) {
  ad::NoGradGuard no_grad;
  options.requires_grad = false;
  const BoundNetwork b = bind(net, options);
  return b.forward(ad::constant(batch)).value();
}

}  // namespace snorm::net
