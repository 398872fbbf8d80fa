#pragma once

#include <cstddef>
#include <string>
#include <variant>

#include "snorm/normalizers/kind.hpp"

namespace snorm::net {

struct Dense {
  std::size_t d_in = 0;
  std::size_t d_out = 0;
  friend bool operator==(const Dense&, const Dense&) = default;
};

/// 2-D convolution over inputs laid out channel-major (C, H, W) per row.
///
/// The kernel is stored as the d_out x (d_in * h * w) matrix that im2col
/// multiplies against; that matrix is what normalizers see.
struct Conv2d {
  std::size_t d_in = 0;   // input channels
  std::size_t d_out = 0;  // output channels
  std::size_t h = 1;      // kernel height
  std::size_t w = 1;      // kernel width
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::size_t in_height = 1;
  std::size_t in_width = 1;

  std::size_t out_height() const { return (in_height + 2 * padding - h) / stride + 1; }
  std::size_t out_width() const { return (in_width + 2 * padding - w) / stride + 1; }
  friend bool operator==(const Conv2d&, const Conv2d&) = default;
};

using LayerKind = std::variant<Dense, Conv2d>;

enum class ActivationKind { identity, relu, leaky_relu, tanh };

struct Activation {
  ActivationKind kind = ActivationKind::identity;
  double slope = 0.1;  // leaky_relu only

  static Activation identity() { return {ActivationKind::identity, 0.1}; }
  static Activation relu() { return {ActivationKind::relu, 0.1}; }
  static Activation leaky_relu(double slope = 0.1) { return {ActivationKind::leaky_relu, slope}; }
  static Activation tanh() { return {ActivationKind::tanh, 0.1}; }

  /// Global Lipschitz constant of the element-wise map.
  double lipschitz_constant() const;

  friend bool operator==(const Activation&, const Activation&) = default;
};

std::string activation_name(ActivationKind kind);
ActivationKind parse_activation(const std::string& name);

struct LayerSpec {
  LayerKind kind;
  Activation activation;
  normalizers::NormalizerKind normalizer;
  bool has_bias = true;

  std::size_t input_dim() const;   // flattened
  std::size_t output_dim() const;  // flattened
  /// Rows and columns of the weight matrix.
  std::size_t weight_rows() const;
  std::size_t weight_cols() const;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Throws DomainError for bad slopes, empty dimensions or degenerate conv geometry.
void validate(const LayerSpec& spec);

LayerSpec dense_layer(std::size_t d_in, std::size_t d_out, Activation act,
                      normalizers::NormalizerKind norm = normalizers::NoNormalizer{},
                      bool has_bias = true);

}  // namespace snorm::net
