#include "snorm/net/layer.hpp"

#include <algorithm>
#include <cmath>

#include "snorm/error.hpp"
#include "snorm/overloaded.hpp"

namespace snorm::net {

double Activation::lipschitz_constant() const {
  switch (kind) {
    case ActivationKind::leaky_relu:
      return std::max(1.0, std::abs(slope));
    case ActivationKind::identity:
    case ActivationKind::relu:
    case ActivationKind::tanh:
      return 1.0;
  }
  return 1.0;
}

std::string activation_name(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::identity:
      return "identity";
    case ActivationKind::relu:
      return "relu";
    case ActivationKind::leaky_relu:
      return "leaky_relu";
    case ActivationKind::tanh:
      return "tanh";
  }
  return "identity";
}

ActivationKind parse_activation(const std::string& name) {
  if (name == "identity") return ActivationKind::identity;
  if (name == "relu") return ActivationKind::relu;
  if (name == "leaky_relu") return ActivationKind::leaky_relu;
  if (name == "tanh") return ActivationKind::tanh;
  throw DomainError("unknown activation '" + name + "'");
}

std::size_t LayerSpec::input_dim() const {
  return std::visit(overloaded{
                        [](const Dense& d) { return d.d_in; },
                        [](const Conv2d& c) { return c.d_in * c.in_height * c.in_width; },
                    },
                    kind);
}

std::size_t LayerSpec::output_dim() const {
  return std::visit(overloaded{
                        [](const Dense& d) { return d.d_out; },
                        [](const Conv2d& c) { return c.d_out * c.out_height() * c.out_width(); },
                    },
                    kind);
}

std::size_t LayerSpec::weight_rows() const {
  return std::visit([](const auto& k) { return k.d_out; }, kind);
}

std::size_t LayerSpec::weight_cols() const {
  return std::visit(overloaded{
                        [](const Dense& d) { return d.d_in; },
                        [](const Conv2d& c) { return c.d_in * c.h * c.w; },
                    },
                    kind);
}

void validate(const LayerSpec& spec) {
  std::visit(overloaded{
                 [](const Dense& d) {
                   if (d.d_in == 0 || d.d_out == 0) throw DomainError("dense: zero dimension");
                 },
                 [](const Conv2d& c) {
                   if (c.d_in == 0 || c.d_out == 0 || c.h == 0 || c.w == 0 || c.stride == 0 ||
                       c.in_height == 0 || c.in_width == 0) {
                     throw DomainError("conv2d: zero dimension");
                   }
                   if (c.in_height + 2 * c.padding < c.h || c.in_width + 2 * c.padding < c.w) {
                     throw DomainError("conv2d: kernel larger than padded input");
                   }
                 },
             },
             spec.kind);
  if (spec.activation.kind == ActivationKind::leaky_relu &&
      !(spec.activation.slope > 0.0 && spec.activation.slope < 1.0)) {
    throw DomainError("leaky_relu slope must lie in (0, 1)");
  }
  normalizers::validate(spec.normalizer);
}

LayerSpec dense_layer(std::size_t d_in, std::size_t d_out, Activation act,
                      normalizers::NormalizerKind norm, bool has_bias) {
  return LayerSpec{Dense{d_in, d_out}, act, std::move(norm), has_bias};
}

}  // namespace snorm::net
