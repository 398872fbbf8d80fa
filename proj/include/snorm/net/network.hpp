#pragma once

#include <string>
#include <vector>

#include "snorm/linalg/matrix.hpp"
#include "snorm/linalg/power_iteration.hpp"
#include "snorm/net/autodiff.hpp"
#include "snorm/net/layer.hpp"

namespace snorm::net {

using linalg::Matrix;

struct LayerParams {
  Matrix weight;  // weight_rows x weight_cols
  Matrix bias;    // 1 x (d_out or channels), empty when has_bias is false
  Matrix gamma;   // 1 x 1 for SpectralReparam, empty otherwise
  linalg::SpectralState spectral;  // populated for spectral kinds only

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

/// Feed-forward stack f(x) = a_L(W_L ... a_1(W_1 x + b_1) ... + b_L).
///
/// Each layer applies its normalizer to the raw weight on every forward; the
/// raw weights are what the optimizer updates.
class Network {
 public:
  Network() = default;
  /// Validates `specs` and draws initial parameters from `rng`.
  Network(std::vector<LayerSpec> specs, Rng& rng);
  /// Reassembles a network from stored parameters (checkpoints). Validates shapes.
  static Network from_parts(std::vector<LayerSpec> specs, std::vector<LayerParams> params);

  const std::vector<LayerSpec>& specs() const noexcept { return specs_; }
  std::size_t num_layers() const noexcept { return specs_.size(); }
  const LayerParams& layer(std::size_t i) const { return params_.at(i); }
  LayerParams& layer(std::size_t i) { return params_.at(i); }

  std::size_t input_dim() const;
  std::size_t output_dim() const;

  /// Trainable tensors in a fixed order: per layer weight, bias, gamma (when present).
  std::vector<Matrix*> parameters();
  std::vector<const Matrix*> parameters() const;
  std::vector<std::string> parameter_names() const;

  /// Re-applies hard constraints (weight clipping) after an optimizer step.
  void project();

  friend bool operator==(const Network&, const Network&) = default;

 private:
  std::vector<LayerSpec> specs_;
  std::vector<LayerParams> params_;
};

/// Gradients shape-congruent with Network::parameters().
struct GradientSet {
  std::vector<Matrix> tensors;
  std::vector<std::string> names;

  double squared_norm() const;
};

enum class SpectralUpdate {
  persist,  // training forward: advance and store each layer's power-iteration state
  scratch,  // evaluation: iterate on a copy, leave the network untouched
};

struct BindOptions {
  SpectralUpdate spectral = SpectralUpdate::scratch;
  /// Power steps per spectral layer; 0 uses each layer's configured n_power.
  int power_steps = 0;
  /// Make the raw parameters differentiable leaves.
  bool requires_grad = true;
  /// Test hook: treat the normalizing scale as a constant, dropping its gradient term.
  bool detach_normalizer = false;
};

/// A network's parameters lifted into the autodiff graph, with the effective
/// (normalized) weights already computed.
class BoundNetwork {
 public:
  const std::vector<ad::Var>& parameters() const noexcept { return params_; }
  const ad::Var& effective_weight(std::size_t layer) const { return effective_.at(layer); }
  std::size_t num_layers() const noexcept { return effective_.size(); }
  const std::vector<linalg::SpectralState>& spectral_states() const noexcept { return states_; }

  /// Applies the stack to a batch of row vectors. When `activations` is given
  /// it receives each layer's post-activation output.
  ad::Var forward(const ad::Var& x, std::vector<ad::Var>* activations = nullptr) const;

  /// Sum of the orthonormal-regularization penalties of all layers (1x1; zero if none).
  ad::Var penalty() const;

 private:
  friend BoundNetwork bind_impl(const Network&, Network*, Rng*, const BindOptions&);
  std::vector<LayerSpec> specs_;
  std::vector<ad::Var> params_;
  std::vector<ad::Var> weights_, biases_, effective_;
  std::vector<linalg::SpectralState> states_;
};

/// Training bind: spectral states are advanced in place (using `rng` for restarts).
BoundNetwork bind(Network& net, Rng& rng, BindOptions options);
/// Evaluation bind; `options.spectral` must be scratch.
BoundNetwork bind(const Network& net, BindOptions options = {});

/// Effective weights as plain matrices, evaluation-only.
std::vector<Matrix> effective_weights(const Network& net, int power_steps = 0);

/// A recorded forward pass that can be differentiated once or many times.
class ForwardPass {
 public:
  ForwardPass() = default;

  bool recorded() const noexcept { return output_.defined(); }
  const Matrix& output() const;
  std::vector<Matrix> activations() const;

  /// Gradient of <upstream, output> with respect to the raw parameters,
  /// chained through each layer's normalizer. Throws if nothing was recorded.
  GradientSet backward(const Matrix& upstream) const;
  /// Gradient of <upstream, output> with respect to the input batch.
  Matrix input_gradient(const Matrix& upstream) const;

 private:
  friend ForwardPass record(BoundNetwork, const Matrix&, std::vector<std::string>);
  BoundNetwork bound_;
  ad::Var input_;
  ad::Var output_;
  std::vector<ad::Var> activations_;
  std::vector<std::string> names_;
};

/// Training forward: advances the power-iteration state of spectral layers first.
ForwardPass forward(Network& net, const Matrix& batch, Rng& rng);
/// Evaluation forward; never mutates `net`.
ForwardPass forward(const Network& net, const Matrix& batch, BindOptions options = {});

/// Output only, no graph.
Matrix predict(const Network& net, const Matrix& batch, BindOptions options = {});

}  // namespace snorm::net
